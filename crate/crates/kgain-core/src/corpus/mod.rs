//! Session corpus data model: parse, validate, and expose recorded Web-search
//! learning sessions.
//!
//! On disk a corpus is one directory per participant:
//!
//! ```text
//! <root>/<participant_id>/
//!   manifest.json    participant_id, pre_score, post_score
//!   timeline.csv     start_ms,end_ms,url   (focus intervals)
//!   frames.jsonl     one frame-layout object per line
//!   pages/index.csv  url,file
//!   pages/<sha256(url) hex>.html
//! ```
//!
//! All text files are UTF-8. Frames carry region boxes (six layout classes)
//! and image boxes with a six-component image-type probability vector.

mod load;
mod write;

pub use load::{load_corpus, LoadedCorpus};
pub use write::write_corpus;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_box, PixelRect};

/// Tolerance for an image-type probability vector summing to one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Maximum knowledge-test score; pre/post scores live in `0..=MAX_SCORE`.
pub const MAX_SCORE: u8 = 10;

/// URL substrings that mark navigation (non-learning) pages.
pub fn default_blacklist() -> Vec<String> {
    ["google", "tripadvisor", "adblock"]
        .into_iter()
        .map(str::to_string)
        .collect()
}

/// The six layout region classes a frame is segmented into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    Heading,
    MenuBar,
    ContentList,
    Text,
    ImageFrame,
    Background,
}

impl RegionClass {
    pub const ALL: [RegionClass; 6] = [
        RegionClass::Heading,
        RegionClass::MenuBar,
        RegionClass::ContentList,
        RegionClass::Text,
        RegionClass::ImageFrame,
        RegionClass::Background,
    ];
}

/// A classified layout region, clipped to its frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionBox {
    pub region_class: RegionClass,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl RegionBox {
    pub fn rect(&self) -> PixelRect {
        PixelRect::new(self.x, self.y, self.w, self.h)
    }
}

/// A detected image with its type pseudo-probability vector, clipped to its
/// frame. `type_probs` follows the canonical image-type order
/// (information visualization, infographic, indoor photo, map, outdoor photo,
/// technical drawing) and sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub type_probs: [f64; 6],
}

impl ImageBox {
    pub fn rect(&self) -> PixelRect {
        PixelRect::new(self.x, self.y, self.w, self.h)
    }
}

/// Layout of one screen-recording frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub frame_index: u32,
    pub timestamp_ms: u64,
    pub width_px: u32,
    pub height_px: u32,
    pub regions: Vec<RegionBox>,
    pub images: Vec<ImageBox>,
}

impl FrameLayout {
    pub fn frame_area(&self) -> u64 {
        self.width_px as u64 * self.height_px as u64
    }
}

/// One focus interval of the session timeline: the URL held focus during
/// `[start_ms, end_ms)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusInterval {
    pub start_ms: u64,
    pub end_ms: u64,
    pub url: String,
}

impl FocusInterval {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

/// A saved HTML page: raw bytes plus the encoding sniffed from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HtmlSnapshot {
    pub url: String,
    pub html_bytes: Vec<u8>,
    pub encoding: String,
}

impl HtmlSnapshot {
    /// Build a snapshot, sniffing the declared encoding (BOM, then a
    /// `<meta charset>` scan of the head) and defaulting to UTF-8.
    pub fn new(url: impl Into<String>, html_bytes: Vec<u8>) -> Self {
        let encoding = sniff_encoding(&html_bytes);
        Self {
            url: url.into(),
            html_bytes,
            encoding: encoding.name().to_string(),
        }
    }

    /// Decode under the declared encoding, falling back to lossy UTF-8.
    /// The flag reports whether any replacement happened.
    pub fn decode(&self) -> (String, bool) {
        let encoding = encoding_rs::Encoding::for_label(self.encoding.as_bytes())
            .unwrap_or(encoding_rs::UTF_8);
        let (text, _, malformed) = encoding.decode(&self.html_bytes);
        (text.into_owned(), malformed)
    }

    /// True if the bytes look like a PDF rather than an HTML document.
    pub fn looks_like_pdf(&self) -> bool {
        self.html_bytes.starts_with(b"%PDF-")
    }
}

fn sniff_encoding(bytes: &[u8]) -> &'static encoding_rs::Encoding {
    if let Some((enc, _)) = encoding_rs::Encoding::for_bom(bytes) {
        return enc;
    }
    // meta charset scan over the first 1024 bytes, ASCII-insensitive
    let head = &bytes[..bytes.len().min(1024)];
    let lower: Vec<u8> = head.iter().map(|b| b.to_ascii_lowercase()).collect();
    if let Some(pos) = find_subslice(&lower, b"charset=") {
        let rest = &head[pos + 8..];
        let rest = rest.strip_prefix(b"\"").or(rest.strip_prefix(b"'")).unwrap_or(rest);
        let end = rest
            .iter()
            .position(|&b| matches!(b, b'"' | b'\'' | b'>' | b' ' | b'/' | b';'))
            .unwrap_or(rest.len());
        if let Some(enc) = encoding_rs::Encoding::for_label(&rest[..end]) {
            return enc;
        }
    }
    encoding_rs::UTF_8
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

/// One participant's recorded session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub participant_id: String,
    pub pre_score: u8,
    pub post_score: u8,
    /// Non-overlapping focus intervals, sorted by start time.
    pub timeline: Vec<FocusInterval>,
    pub frames: Vec<FrameLayout>,
    pub pages: BTreeMap<String, HtmlSnapshot>,
}

impl SessionRecord {
    /// Post-score minus pre-score.
    pub fn knowledge_gain(&self) -> i32 {
        self.post_score as i32 - self.pre_score as i32
    }

    /// The URL in focus at the frame's timestamp: the unique interval with
    /// `start_ms <= t < end_ms`, if any.
    pub fn frame_url(&self, frame: &FrameLayout) -> Option<&str> {
        let t = frame.timestamp_ms;
        let idx = self.timeline.partition_point(|iv| iv.start_ms <= t);
        if idx == 0 {
            return None;
        }
        let iv = &self.timeline[idx - 1];
        (t < iv.end_ms).then_some(iv.url.as_str())
    }

    /// Learning frames: frames whose focused URL exists and contains no
    /// blacklist term (case-insensitive substring over the whole URL).
    /// Frames with no focused URL are navigation and excluded.
    pub fn learning_frames(&self, blacklist: &[String]) -> Vec<&FrameLayout> {
        let terms: Vec<String> = blacklist.iter().map(|t| t.to_lowercase()).collect();
        self.frames
            .iter()
            .filter(|f| match self.frame_url(f) {
                Some(url) => {
                    let url = url.to_lowercase();
                    !terms.iter().any(|t| url.contains(t))
                }
                None => false,
            })
            .collect()
    }

    /// Unique learning URLs in first-focus order, with total dwell time in
    /// milliseconds summed over all their focus intervals.
    pub fn learning_urls(&self, blacklist: &[String]) -> Vec<(String, u64)> {
        let terms: Vec<String> = blacklist.iter().map(|t| t.to_lowercase()).collect();
        let mut order: Vec<String> = Vec::new();
        let mut dwell: BTreeMap<String, u64> = BTreeMap::new();
        for iv in &self.timeline {
            let lower = iv.url.to_lowercase();
            if terms.iter().any(|t| lower.contains(t)) {
                continue;
            }
            if !dwell.contains_key(&iv.url) {
                order.push(iv.url.clone());
            }
            *dwell.entry(iv.url.clone()).or_insert(0) += iv.duration_ms();
        }
        order
            .into_iter()
            .map(|url| {
                let d = dwell[&url];
                (url, d)
            })
            .collect()
    }

    /// Validate the record's invariants (scores in range, timeline sorted and
    /// non-overlapping, frame dimensions positive, boxes within bounds,
    /// probability vectors valid).
    pub fn validate(&self) -> Result<()> {
        let who = &self.participant_id;
        if self.pre_score > MAX_SCORE {
            return Err(Error::session(
                who,
                format!("pre_score out of range: {} (expected 0..=10)", self.pre_score),
            ));
        }
        if self.post_score > MAX_SCORE {
            return Err(Error::session(
                who,
                format!("post_score out of range: {} (expected 0..=10)", self.post_score),
            ));
        }
        for (i, iv) in self.timeline.iter().enumerate() {
            if iv.start_ms >= iv.end_ms {
                return Err(Error::session(
                    who,
                    format!("timeline interval {i} is empty or inverted ({}..{})", iv.start_ms, iv.end_ms),
                ));
            }
            if i > 0 {
                let prev = &self.timeline[i - 1];
                if iv.start_ms < prev.start_ms {
                    return Err(Error::session(who, format!("timeline not sorted at interval {i}")));
                }
                if iv.start_ms < prev.end_ms {
                    return Err(Error::session(
                        who,
                        format!(
                            "timeline intervals overlap: [{}..{}) and [{}..{})",
                            prev.start_ms, prev.end_ms, iv.start_ms, iv.end_ms
                        ),
                    ));
                }
            }
        }
        for frame in &self.frames {
            validate_frame(who, frame)?;
        }
        Ok(())
    }
}

fn validate_frame(who: &str, frame: &FrameLayout) -> Result<()> {
    if frame.width_px == 0 || frame.height_px == 0 {
        return Err(Error::session(
            who,
            format!("frame {} has non-positive dimensions", frame.frame_index),
        ));
    }
    let inside = |r: &PixelRect| r.x1() <= frame.width_px && r.y1() <= frame.height_px;
    for b in &frame.regions {
        if !inside(&b.rect()) {
            return Err(Error::session(
                who,
                format!("frame {}: region box exceeds frame bounds", frame.frame_index),
            ));
        }
    }
    for b in &frame.images {
        if !inside(&b.rect()) {
            return Err(Error::session(
                who,
                format!("frame {}: image box exceeds frame bounds", frame.frame_index),
            ));
        }
        validate_probs(who, frame.frame_index, &b.type_probs)?;
    }
    Ok(())
}

fn validate_probs(who: &str, frame_index: u32, probs: &[f64; 6]) -> Result<()> {
    for &p in probs {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::session(
                who,
                format!("frame {frame_index}: type_probs component out of [0,1]"),
            ));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::session(
            who,
            format!("frame {frame_index}: type_probs sum {sum} != 1"),
        ));
    }
    Ok(())
}

/// Clip raw (possibly out-of-frame) box coordinates into a frame.
pub(crate) fn clip_to_frame(x: i64, y: i64, w: i64, h: i64, frame_w: u32, frame_h: u32) -> PixelRect {
    clip_box(x, y, w, h, frame_w, frame_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_at(ts: u64) -> FrameLayout {
        FrameLayout {
            frame_index: 0,
            timestamp_ms: ts,
            width_px: 100,
            height_px: 100,
            regions: vec![],
            images: vec![],
        }
    }

    fn session_with_timeline(timeline: Vec<FocusInterval>) -> SessionRecord {
        SessionRecord {
            participant_id: "p001".into(),
            pre_score: 3,
            post_score: 7,
            timeline,
            frames: vec![],
            pages: BTreeMap::new(),
        }
    }

    fn iv(start: u64, end: u64, url: &str) -> FocusInterval {
        FocusInterval {
            start_ms: start,
            end_ms: end,
            url: url.into(),
        }
    }

    #[test]
    fn frame_url_inside_interval() {
        let s = session_with_timeline(vec![iv(0, 1000, "https://a.com")]);
        assert_eq!(s.frame_url(&frame_at(500)), Some("https://a.com"));
    }

    #[test]
    fn frame_url_end_is_exclusive() {
        let s = session_with_timeline(vec![iv(0, 1000, "https://a.com")]);
        assert_eq!(s.frame_url(&frame_at(1000)), None);
    }

    #[test]
    fn frame_url_start_is_inclusive() {
        let s = session_with_timeline(vec![iv(200, 1000, "https://a.com")]);
        assert_eq!(s.frame_url(&frame_at(200)), Some("https://a.com"));
    }

    #[test]
    fn frame_url_in_gap_is_absent() {
        let s = session_with_timeline(vec![iv(0, 100, "https://a.com"), iv(500, 900, "https://b.com")]);
        assert_eq!(s.frame_url(&frame_at(300)), None);
    }

    #[test]
    fn learning_frames_excludes_blacklisted_urls() {
        let mut s = session_with_timeline(vec![
            iv(0, 1000, "https://www.google.com/search?q=storm"),
            iv(1000, 2000, "https://weather.example.org/article"),
        ]);
        s.frames = vec![frame_at(500), frame_at(1500)];
        let learning = s.learning_frames(&default_blacklist());
        assert_eq!(learning.len(), 1);
        assert_eq!(learning[0].timestamp_ms, 1500);
    }

    #[test]
    fn learning_frames_blacklist_is_case_insensitive() {
        let mut s = session_with_timeline(vec![iv(0, 1000, "https://www.GOOGLE.com/")]);
        s.frames = vec![frame_at(0)];
        assert!(s.learning_frames(&default_blacklist()).is_empty());
    }

    #[test]
    fn learning_frames_can_exclude_everything() {
        let mut s = session_with_timeline(vec![iv(0, 5000, "https://www.tripadvisor.com/x")]);
        s.frames = vec![frame_at(0), frame_at(1000), frame_at(2000)];
        assert!(s.learning_frames(&default_blacklist()).is_empty());
    }

    #[test]
    fn learning_plus_excluded_partitions_frames() {
        let mut s = session_with_timeline(vec![
            iv(0, 1000, "https://www.google.com/"),
            iv(1000, 3000, "https://learn.example.org/a"),
        ]);
        s.frames = vec![frame_at(0), frame_at(1500), frame_at(2500), frame_at(9999)];
        let learning = s.learning_frames(&default_blacklist()).len();
        assert_eq!(learning, 2);
        assert_eq!(s.frames.len() - learning, 2); // one navigation frame, one out of timeline
    }

    #[test]
    fn learning_urls_sum_dwell_per_unique_url() {
        let s = session_with_timeline(vec![
            iv(0, 1000, "https://a.com"),
            iv(1000, 2000, "https://www.google.com/"),
            iv(2000, 2500, "https://b.com"),
            iv(2500, 4000, "https://a.com"),
        ]);
        let urls = s.learning_urls(&default_blacklist());
        assert_eq!(
            urls,
            vec![("https://a.com".to_string(), 2500), ("https://b.com".to_string(), 500)]
        );
    }

    #[test]
    fn validate_rejects_score_out_of_range() {
        let mut s = session_with_timeline(vec![]);
        s.post_score = 11;
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("score out of range"), "{err}");
        assert!(err.contains("p001"), "{err}");
    }

    #[test]
    fn validate_rejects_overlapping_timeline() {
        let s = session_with_timeline(vec![iv(0, 1000, "a"), iv(500, 1500, "b")]);
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("overlap"), "{err}");
    }

    #[test]
    fn validate_rejects_bad_prob_vector() {
        let mut s = session_with_timeline(vec![]);
        s.frames = vec![FrameLayout {
            frame_index: 0,
            timestamp_ms: 0,
            width_px: 100,
            height_px: 100,
            regions: vec![],
            images: vec![ImageBox {
                x: 0,
                y: 0,
                w: 10,
                h: 10,
                type_probs: [0.5, 0.5, 0.5, 0.0, 0.0, 0.0],
            }],
        }];
        assert!(s.validate().is_err());
    }

    #[test]
    fn encoding_sniffs_meta_charset() {
        let html = b"<html><head><meta charset=\"windows-1252\"></head><body>caf\xe9</body></html>".to_vec();
        let snap = HtmlSnapshot::new("https://a.com", html);
        assert_eq!(snap.encoding, "windows-1252");
        let (text, fallback) = snap.decode();
        assert!(text.contains("caf\u{e9}"));
        assert!(!fallback);
    }

    #[test]
    fn encoding_defaults_to_utf8() {
        let snap = HtmlSnapshot::new("https://a.com", b"<p>hi</p>".to_vec());
        assert_eq!(snap.encoding, "UTF-8");
    }

    #[test]
    fn pdf_bytes_are_detected() {
        let snap = HtmlSnapshot::new("https://a.com/x.pdf", b"%PDF-1.4 ...".to_vec());
        assert!(snap.looks_like_pdf());
    }
}
