//! Synthetic corpus generator with planted feature effects.
//!
//! Each session draws one latent skill value t in [0, 1). Knowledge gain is a
//! clipped rounded linear function of t plus Gaussian noise, so the label
//! depends on nothing else. A planted feature is rendered into the session
//! artifacts as base * (1 + direction * strength * (t - 0.5)), monotone in t;
//! every other supported feature gets a small session-level jitter that is
//! independent of t, which makes it pure noise with respect to the label.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    write_corpus, FocusInterval, FrameLayout, HtmlSnapshot, ImageBox, RegionBox, RegionClass,
    SessionRecord,
};
use crate::error::{Error, Result};
use crate::{derive_seed, seed_tags};

/// Feature names an effect may target. Coverage, image-size and image-type
/// features are rendered through frame geometry and type probabilities; the
/// text features through generated page HTML. Quantization granularity
/// varies: h_p is the coarsest (paragraph counts are small integers).
pub const PLANTABLE_FEATURES: [&str; 19] = [
    "mm_heading",
    "mm_menubar",
    "mm_contentlist",
    "mm_text",
    "mm_image",
    "mm_background",
    "mm_avg_imgsize",
    "img_infovis",
    "img_infographic",
    "img_indoor",
    "img_map",
    "img_outdoor",
    "img_techdraw",
    "c_word",
    "c_sentence",
    "h_link",
    "h_script",
    "h_oth_ul",
    "h_p",
];

/// Lexicon shipped with every generated corpus (written to lexicon.txt in
/// the corpus root). Categories match the generator's vocabulary.
pub const SYNTH_LEXICON: &str = "\
# categories for the synthetic corpus vocabulary
[nature]
rain
wind
storm
cloud
snow
mist
[motion]
rise*
fall*
flow*
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub feature: String,
    /// Only the sign is used: +1 ties the feature positively to kg.
    pub direction: f64,
    /// Relative swing across the t range; 1.0 means +-50% around the base.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_sessions: usize,
    pub frames_per_session: usize,
    #[serde(default)]
    pub effect_map: Vec<Effect>,
    pub noise_level: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SynthSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sessions == 0 {
            return Err(Error::invalid("n_sessions must be at least 1"));
        }
        if self.frames_per_session == 0 {
            return Err(Error::invalid("frames_per_session must be at least 1"));
        }
        if !self.noise_level.is_finite() || self.noise_level < 0.0 {
            return Err(Error::invalid("noise_level must be finite and non-negative"));
        }
        let mut seen = Vec::new();
        for effect in &self.effect_map {
            if !PLANTABLE_FEATURES.contains(&effect.feature.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown feature \"{}\" in effect_map",
                    effect.feature
                )));
            }
            if seen.contains(&effect.feature.as_str()) {
                return Err(Error::invalid(format!(
                    "feature \"{}\" appears twice in effect_map",
                    effect.feature
                )));
            }
            seen.push(effect.feature.as_str());
            if !effect.strength.is_finite() || effect.strength < 0.0 {
                return Err(Error::invalid(format!(
                    "effect on \"{}\" needs a finite non-negative strength",
                    effect.feature
                )));
            }
            if !effect.direction.is_finite() || effect.direction == 0.0 {
                return Err(Error::invalid(format!(
                    "effect on \"{}\" needs a nonzero finite direction",
                    effect.feature
                )));
            }
        }
        Ok(())
    }
}

/// One standard normal draw (Box-Muller, two uniforms consumed).
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    r * (2.0 * std::f64::consts::PI * u2).cos()
}

const FRAME_W: u32 = 1280;
const FRAME_H: u32 = 800;
const IMG_W: u32 = 400;
const KG_INTERCEPT: f64 = 1.0;
const KG_SLOPE: f64 = 8.0;
const JITTER: f64 = 0.2;

const VOCAB: [&str; 15] = [
    "rain", "wind", "storm", "cloud", "light", "sound", "air", "water", "sky", "ground",
    "heat", "cold", "dust", "mist", "snow",
];

/// (base value, clamp low, clamp high) per plantable feature, indexed in
/// PLANTABLE_FEATURES order. Coverages are frame-area fractions, img_* are
/// probability masses, the rest are counts or per-unit targets.
const FEATURE_RANGES: [(f64, f64, f64); 19] = [
    (0.10, 0.01, 0.60),  // mm_heading
    (0.08, 0.01, 0.60),  // mm_menubar
    (0.12, 0.01, 0.60),  // mm_contentlist
    (0.30, 0.01, 0.60),  // mm_text
    (0.18, 0.01, 0.60),  // mm_image
    (0.25, 0.01, 0.60),  // mm_background
    (0.15, 0.05, 0.31),  // mm_avg_imgsize
    (0.30, 0.01, 0.85),  // img_infovis
    (0.10, 0.01, 0.85),  // img_infographic
    (0.15, 0.01, 0.85),  // img_indoor
    (0.15, 0.01, 0.85),  // img_map
    (0.20, 0.01, 0.85),  // img_outdoor
    (0.10, 0.01, 0.85),  // img_techdraw
    (300.0, 40.0, 2000.0), // c_word
    (8.0, 4.0, 20.0),    // c_sentence
    (10.0, 0.0, 200.0),  // h_link
    (4.0, 0.0, 50.0),    // h_script
    (3.0, 0.0, 50.0),    // h_oth_ul
    (40.0, 8.0, 200.0),  // h_p
];

struct SessionPlan {
    values: [f64; 19],
}

impl SessionPlan {
    fn get(&self, name: &str) -> f64 {
        let idx = PLANTABLE_FEATURES.iter().position(|&f| f == name).unwrap();
        self.values[idx]
    }
}

/// Deterministic draw schedule per session: t, then one jitter per plantable
/// feature, then the kg noise pair, then the pre-score draw. The schedule
/// never depends on the effect map, so adding an effect only remaps values.
fn plan_session(
    effects: &BTreeMap<&str, (f64, f64)>,
    rng: &mut ChaCha8Rng,
) -> (SessionPlan, f64, f64, f64) {
    let t: f64 = rng.gen();
    let mut values = [0.0; 19];
    for (idx, name) in PLANTABLE_FEATURES.iter().enumerate() {
        let u: f64 = rng.gen();
        let (base, lo, hi) = FEATURE_RANGES[idx];
        let modulation = match effects.get(name) {
            Some(&(direction, strength)) => direction * strength * (t - 0.5),
            None => JITTER * (u - 0.5),
        };
        values[idx] = (base * (1.0 + modulation)).clamp(lo, hi);
    }
    let z = standard_normal(rng);
    let u_pre: f64 = rng.gen();
    (SessionPlan { values }, t, z, u_pre)
}

/// Quantize a positive weight vector to multiples of 1/1024 summing exactly
/// to one. The rounding remainder lands on the largest unplanted class so a
/// planted probability stays an undistorted monotone function of t.
fn dyadic_probs(raw: [f64; 6], planted: [bool; 6]) -> [f64; 6] {
    let total: f64 = raw.iter().sum();
    let mut units = [0i64; 6];
    for (u, &value) in units.iter_mut().zip(raw.iter()) {
        *u = (value / total * 1024.0).round() as i64;
    }
    let delta = 1024 - units.iter().sum::<i64>();
    let target = (0..6)
        .filter(|&c| !planted[c])
        .max_by_key(|&c| units[c])
        .unwrap_or_else(|| (0..6).max_by_key(|&c| units[c]).unwrap());
    units[target] += delta;
    let mut probs = [0.0; 6];
    for (p, &u) in probs.iter_mut().zip(units.iter()) {
        *p = u as f64 / 1024.0;
    }
    probs
}

fn learning_frame(plan: &SessionPlan, probs: [f64; 6], frame_index: u32, ts: u64) -> FrameLayout {
    let cover_box = |class: RegionClass, cover: f64| RegionBox {
        region_class: class,
        x: 0,
        y: 0,
        w: ((cover * FRAME_W as f64).round() as u32).clamp(1, FRAME_W),
        h: FRAME_H,
    };
    let regions = vec![
        cover_box(RegionClass::Heading, plan.get("mm_heading")),
        cover_box(RegionClass::MenuBar, plan.get("mm_menubar")),
        cover_box(RegionClass::ContentList, plan.get("mm_contentlist")),
        cover_box(RegionClass::Text, plan.get("mm_text")),
        cover_box(RegionClass::ImageFrame, plan.get("mm_image")),
        cover_box(RegionClass::Background, plan.get("mm_background")),
    ];
    let img_h = ((plan.get("mm_avg_imgsize") * (FRAME_W * FRAME_H) as f64 / IMG_W as f64)
        .round() as u32)
        .clamp(100, FRAME_H);
    let images = vec![
        ImageBox { x: 0, y: 0, w: IMG_W, h: img_h, type_probs: probs },
        ImageBox { x: 640, y: 0, w: IMG_W, h: img_h, type_probs: probs },
    ];
    FrameLayout {
        frame_index,
        timestamp_ms: ts,
        width_px: FRAME_W,
        height_px: FRAME_H,
        regions,
        images,
    }
}

fn navigation_frame() -> FrameLayout {
    FrameLayout {
        frame_index: 0,
        timestamp_ms: 1_000,
        width_px: FRAME_W,
        height_px: FRAME_H,
        regions: vec![RegionBox { region_class: RegionClass::Text, x: 0, y: 0, w: 600, h: FRAME_H }],
        images: vec![],
    }
}

fn word_for(session_idx: usize, counter: usize) -> &'static str {
    VOCAB[(session_idx + counter * 7) % VOCAB.len()]
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn learning_page_html(pid: &str, plan: &SessionPlan, session_idx: usize) -> String {
    let words_per_sentence = (plan.get("c_sentence").round() as usize).clamp(3, 30);
    let target_words = plan.get("c_word").round().max(1.0) as usize;
    let n_sentences =
        ((target_words as f64 / words_per_sentence as f64).round() as usize).max(1);
    let total_words = n_sentences * words_per_sentence;
    let n_paragraphs = ((total_words as f64 / plan.get("h_p")).round() as usize)
        .clamp(1, n_sentences);

    let mut counter = 0usize;
    let mut sentences = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let mut parts = Vec::with_capacity(words_per_sentence);
        for w in 0..words_per_sentence {
            let word = word_for(session_idx, counter);
            counter += 1;
            parts.push(if w == 0 { capitalize(word) } else { word.to_string() });
        }
        sentences.push(format!("{}.", parts.join(" ")));
    }

    let base = n_sentences / n_paragraphs;
    let rem = n_sentences % n_paragraphs;
    let mut html = format!(
        "<html><head><meta charset=\"utf-8\"><title>Session {pid}</title></head>\n<body>\n"
    );
    let mut cursor = 0;
    for p in 0..n_paragraphs {
        let take = base + usize::from(p < rem);
        html.push_str("<p>");
        html.push_str(&sentences[cursor..cursor + take].join(" "));
        html.push_str("</p>\n");
        cursor += take;
    }
    for _ in 0..plan.get("h_link").round().max(0.0) as usize {
        html.push_str("<a href=\"#\"></a>");
    }
    html.push('\n');
    for _ in 0..plan.get("h_oth_ul").round().max(0.0) as usize {
        html.push_str("<ul></ul>");
    }
    html.push('\n');
    for _ in 0..plan.get("h_script").round().max(0.0) as usize {
        html.push_str("<script>var i = 0;</script>");
    }
    html.push_str("\n<video></video><audio></audio><object></object>\n</body></html>\n");
    html
}

const NAV_PAGE_HTML: &str = "<html><head><meta charset=\"utf-8\"><title>search</title></head>\
<body><p>Search results.</p></body></html>\n";

/// Build the sessions in memory. Fully deterministic from spec.seed.
pub fn generate_sessions(spec: &SynthSpec) -> Result<Vec<SessionRecord>> {
    spec.validate()?;
    let mut effects: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for effect in &spec.effect_map {
        let name = PLANTABLE_FEATURES
            .iter()
            .find(|&&f| f == effect.feature)
            .expect("validated feature name");
        effects.insert(name, (effect.direction.signum(), effect.strength));
    }
    let planted_probs: [bool; 6] = std::array::from_fn(|c| {
        effects.contains_key(PLANTABLE_FEATURES[7 + c])
    });
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, seed_tags::SYNTH, 0));
    let mut sessions = Vec::with_capacity(spec.n_sessions);
    for i in 0..spec.n_sessions {
        let pid = format!("s{:04}", i + 1);
        let (plan, t, z, u_pre) = plan_session(&effects, &mut rng);

        let raw_probs: [f64; 6] = std::array::from_fn(|c| plan.values[7 + c]);
        let probs = dyadic_probs(raw_probs, planted_probs);

        let kg = (KG_INTERCEPT + KG_SLOPE * t + spec.noise_level * z).round() as i64;
        let kg = kg.clamp(-10, 10);
        let lo = (-kg).max(0);
        let hi = (10 - kg).min(10);
        let span = (hi - lo + 1) as f64;
        let pre = (lo + (u_pre * span).floor() as i64).min(hi);
        let post = pre + kg;

        let nav_url = format!("https://www.google.com/search?q={pid}");
        let learn_url = format!("https://learn.example/{pid}");
        let session_end = 30_000 + (spec.frames_per_session as u64 + 1) * 1_000;
        let timeline = vec![
            FocusInterval { start_ms: 0, end_ms: 30_000, url: nav_url.clone() },
            FocusInterval { start_ms: 30_000, end_ms: session_end, url: learn_url.clone() },
        ];
        let mut frames = vec![navigation_frame()];
        for j in 0..spec.frames_per_session {
            frames.push(learning_frame(
                &plan,
                probs,
                (j + 1) as u32,
                30_000 + (j as u64 + 1) * 1_000,
            ));
        }
        let mut pages = BTreeMap::new();
        pages.insert(nav_url.clone(), HtmlSnapshot::new(&nav_url, NAV_PAGE_HTML.as_bytes().to_vec()));
        let page_html = learning_page_html(&pid, &plan, i);
        pages.insert(learn_url.clone(), HtmlSnapshot::new(&learn_url, page_html.into_bytes()));

        let session = SessionRecord {
            participant_id: pid,
            pre_score: pre as u8,
            post_score: post as u8,
            timeline,
            frames,
            pages,
        };
        session.validate()?;
        sessions.push(session);
    }
    Ok(sessions)
}

/// Generate and write a corpus plus its lexicon.txt to `out`.
pub fn generate_corpus(spec: &SynthSpec, out: &Path) -> Result<()> {
    let sessions = generate_sessions(spec)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    std::fs::write(out.join("lexicon.txt"), SYNTH_LEXICON)
        .map_err(|e| Error::io(&out.join("lexicon.txt"), e))?;
    write_corpus(out, &sessions)
}
