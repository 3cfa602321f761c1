//! Corpus loader: strict about structure, forgiving about page payloads.
//!
//! Structural problems (missing files, malformed rows, invalid scores,
//! overlapping timelines) are hard errors. Page-level problems (missing
//! snapshot, PDF payload, undecodable bytes) are collected as warnings so a
//! single bad save does not sink a whole corpus.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{
    clip_to_frame, FocusInterval, FrameLayout, HtmlSnapshot, ImageBox, RegionBox, RegionClass,
    SessionRecord,
};

/// A loaded corpus: sessions sorted by participant id plus any non-fatal
/// warnings encountered on the way.
#[derive(Debug)]
pub struct LoadedCorpus {
    pub sessions: Vec<SessionRecord>,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct Manifest {
    participant_id: String,
    pre_score: i64,
    post_score: i64,
}

/// Raw frame line: coordinates may stick out of the frame and are clipped
/// into it while loading.
#[derive(Deserialize)]
struct RawFrame {
    frame_index: u32,
    timestamp_ms: u64,
    width_px: u32,
    height_px: u32,
    regions: Vec<RawRegion>,
    images: Vec<RawImage>,
}

#[derive(Deserialize)]
struct RawRegion {
    region_class: RegionClass,
    x: i64,
    y: i64,
    w: i64,
    h: i64,
}

#[derive(Deserialize)]
struct RawImage {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    type_probs: [f64; 6],
}

/// Load every participant directory under `root`.
pub fn load_corpus(root: &Path) -> Result<LoadedCorpus> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::invalid(format!(
            "corpus root {} contains no participant directories",
            root.display()
        )));
    }

    let mut sessions = Vec::with_capacity(dirs.len());
    let mut warnings = Vec::new();
    for dir in dirs {
        sessions.push(load_session(&dir, &mut warnings)?);
    }
    Ok(LoadedCorpus { sessions, warnings })
}

/// Load one participant directory.
pub fn load_session(dir: &Path, warnings: &mut Vec<String>) -> Result<SessionRecord> {
    let dir_name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("unreadable directory name under {}", dir.display())))?
        .to_string();

    let manifest = read_manifest(&dir.join("manifest.json"), &dir_name)?;
    let timeline = read_timeline(&dir.join("timeline.csv"))?;
    let frames = read_frames(&dir.join("frames.jsonl"))?;
    let pages = read_pages(dir, &manifest.participant_id, &timeline, warnings)?;

    let session = SessionRecord {
        participant_id: manifest.participant_id,
        pre_score: manifest.pre_score as u8,
        post_score: manifest.post_score as u8,
        timeline,
        frames,
        pages,
    };
    session.validate()?;
    Ok(session)
}

fn read_manifest(path: &Path, dir_name: &str) -> Result<Manifest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = serde_json::from_slice(&bytes)?;
    if manifest.participant_id != dir_name {
        return Err(Error::session(
            &manifest.participant_id,
            format!("manifest participant_id does not match directory name {dir_name:?}"),
        ));
    }
    for (field, value) in [("pre_score", manifest.pre_score), ("post_score", manifest.post_score)] {
        if !(0..=10).contains(&value) {
            return Err(Error::session(
                &manifest.participant_id,
                format!("{field} score out of range: {value} (expected 0..=10)"),
            ));
        }
    }
    Ok(manifest)
}

fn read_timeline(path: &Path) -> Result<Vec<FocusInterval>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("cannot open timeline: {e}"),
            },
            _ => Error::Csv(e),
        })?;
    let mut intervals = Vec::new();
    for (i, record) in reader.deserialize::<FocusInterval>().enumerate() {
        let iv = record.map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        intervals.push(iv);
    }
    // the loader tolerates unsorted rows; overlap stays a hard error in validate()
    intervals.sort_by_key(|iv| (iv.start_ms, iv.end_ms));
    Ok(intervals)
}

fn read_frames(path: &Path) -> Result<Vec<FrameLayout>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawFrame = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if raw.width_px == 0 || raw.height_px == 0 {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("frame {} has non-positive dimensions", raw.frame_index),
            });
        }
        let (fw, fh) = (raw.width_px, raw.height_px);
        let regions = raw
            .regions
            .into_iter()
            .map(|r| {
                let rect = clip_to_frame(r.x, r.y, r.w, r.h, fw, fh);
                RegionBox {
                    region_class: r.region_class,
                    x: rect.x,
                    y: rect.y,
                    w: rect.w,
                    h: rect.h,
                }
            })
            .collect();
        let images = raw
            .images
            .into_iter()
            .map(|b| {
                let rect = clip_to_frame(b.x, b.y, b.w, b.h, fw, fh);
                ImageBox {
                    x: rect.x,
                    y: rect.y,
                    w: rect.w,
                    h: rect.h,
                    type_probs: b.type_probs,
                }
            })
            .collect();
        frames.push(FrameLayout {
            frame_index: raw.frame_index,
            timestamp_ms: raw.timestamp_ms,
            width_px: raw.width_px,
            height_px: raw.height_px,
            regions,
            images,
        });
    }
    frames.sort_by_key(|f| (f.timestamp_ms, f.frame_index));
    Ok(frames)
}

#[derive(Deserialize)]
struct PageIndexRow {
    url: String,
    file: String,
}

fn read_pages(
    dir: &Path,
    participant: &str,
    timeline: &[FocusInterval],
    warnings: &mut Vec<String>,
) -> Result<BTreeMap<String, HtmlSnapshot>> {
    let index_path = dir.join("pages").join("index.csv");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&index_path)
        .map_err(|e| Error::Malformed {
            path: index_path.to_path_buf(),
            line: 0,
            message: format!("cannot open page index: {e}"),
        })?;
    let mut pages = BTreeMap::new();
    for (i, row) in reader.deserialize::<PageIndexRow>().enumerate() {
        let row = row.map_err(|e| Error::Malformed {
            path: index_path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        let page_path = dir.join("pages").join(&row.file);
        let bytes = match fs::read(&page_path) {
            Ok(b) => b,
            Err(e) => {
                warnings.push(format!(
                    "participant {participant}: page file {} for {} unreadable ({e}); page skipped",
                    row.file, row.url
                ));
                continue;
            }
        };
        let snapshot = HtmlSnapshot::new(row.url.clone(), bytes);
        if snapshot.looks_like_pdf() {
            warnings.push(format!(
                "participant {participant}: page {} is a PDF, not HTML; page skipped",
                row.url
            ));
            continue;
        }
        pages.insert(row.url, snapshot);
    }
    // every timeline URL should have a snapshot; version skews are survivable
    for iv in timeline {
        if !pages.contains_key(&iv.url) {
            let known = warnings.iter().any(|w| w.contains(&iv.url) && w.contains(participant));
            if !known {
                warnings.push(format!(
                    "participant {participant}: no page snapshot for {}; its text contributes nothing",
                    iv.url
                ));
            }
        }
    }
    Ok(pages)
}
