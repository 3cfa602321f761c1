//! Text features per participant: complexity counts, readability grades,
//! HTML structural counts, and lexicon-category percentages, aggregated over
//! the learning-relevant pages of a session.

mod html;
mod lexicon;
mod pos;
mod readability;

pub use html::{extract_page_text, parse_page, tokenize_text, PageText, ParsedPage, TagCounts, Tokenized};
pub use lexicon::Lexicon;
pub use pos::{PosTag, PosTagger, RuleTagger};
pub use readability::{
    flesch_kincaid, gunning_fog, is_complex, readability, smog, syllables, ReadabilityFeatures,
};

use crate::corpus::{HtmlSnapshot, SessionRecord};
use crate::error::{Error, Result};
use crate::features::FeatureMap;

/// Fixed text feature names that precede the lexicon block.
pub const BASE_TEXT_FEATURE_NAMES: [&str; 17] = [
    "c_word",
    "c_char",
    "c_sentence",
    "c_noun",
    "c_verb",
    "c_adj",
    "c_oth",
    "c_gi",
    "c_smog",
    "c_fk",
    "h_link",
    "h_p",
    "h_oth_ul",
    "h_script",
    "h_vid",
    "h_aud",
    "h_obj",
];

/// Full text feature schema for a lexicon: base names, l_<category> in
/// lexicon order, l_AllPunc last.
pub fn ti_feature_names(lexicon: &Lexicon) -> Vec<String> {
    let mut names: Vec<String> = BASE_TEXT_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend(lexicon.names().iter().map(|c| format!("l_{c}")));
    names.push("l_AllPunc".to_string());
    names
}

/// Knobs for text extraction.
#[derive(Debug, Clone)]
pub struct TextConfig {
    /// URL substrings marking navigation pages.
    pub blacklist: Vec<String>,
    /// Weight pages by focus-interval dwell time instead of uniformly.
    pub dwell_weighted: bool,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            blacklist: crate::corpus::default_blacklist(),
            dwell_weighted: false,
        }
    }
}

/// Document complexity block: c_word .. c_oth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityFeatures {
    pub c_word: f64,
    pub c_char: f64,
    pub c_sentence: f64,
    pub c_noun: f64,
    pub c_verb: f64,
    pub c_adj: f64,
    pub c_oth: f64,
}

/// c_word, c_char, c_sentence and the POS ratios. A page with no tokens
/// scores 0 on all of them.
pub fn complexity_features(text: &PageText, tagger: &dyn PosTagger) -> ComplexityFeatures {
    let words = text.tokens.len();
    if words == 0 {
        return ComplexityFeatures {
            c_word: 0.0,
            c_char: 0.0,
            c_sentence: 0.0,
            c_noun: 0.0,
            c_verb: 0.0,
            c_adj: 0.0,
            c_oth: 0.0,
        };
    }
    // characters = all non-whitespace characters of the page, per-word
    let token_chars: usize = text.tokens.iter().map(|t| t.chars().count()).sum();
    let c_char = (token_chars + text.punct_count) as f64 / words as f64;
    let c_sentence = if text.sentences.is_empty() {
        0.0
    } else {
        let covered: usize = text.sentences.iter().map(|s| s.len()).sum();
        covered as f64 / text.sentences.len() as f64
    };
    let mut counts = [0usize; 4];
    for token in &text.tokens {
        let slot = match tagger.tag(token) {
            PosTag::Noun => 0,
            PosTag::Verb => 1,
            PosTag::Adj => 2,
            PosTag::Other => 3,
        };
        counts[slot] += 1;
    }
    let ratio = |n: usize| n as f64 / words as f64;
    ComplexityFeatures {
        c_word: words as f64,
        c_char,
        c_sentence,
        c_noun: ratio(counts[0]),
        c_verb: ratio(counts[1]),
        c_adj: ratio(counts[2]),
        c_oth: ratio(counts[3]),
    }
}

/// Structural block h_link .. h_obj for one page.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralFeatures {
    pub h_link: f64,
    pub h_p: f64,
    pub h_oth_ul: f64,
    pub h_script: f64,
    pub h_vid: f64,
    pub h_aud: f64,
    pub h_obj: f64,
}

/// Tag counts plus mean words per paragraph.
pub fn structural_features(page: &HtmlSnapshot) -> StructuralFeatures {
    structural_from_parsed(&parse_page(page))
}

fn structural_from_parsed(parsed: &ParsedPage) -> StructuralFeatures {
    let h_p = if parsed.text.paragraphs.is_empty() {
        0.0
    } else {
        let total: usize = parsed.text.paragraphs.iter().sum();
        total as f64 / parsed.text.paragraphs.len() as f64
    };
    StructuralFeatures {
        h_link: parsed.tags.links as f64,
        h_p,
        h_oth_ul: parsed.tags.unordered_lists as f64,
        h_script: parsed.tags.scripts as f64,
        h_vid: parsed.tags.videos as f64,
        h_aud: parsed.tags.audios as f64,
        h_obj: parsed.tags.objects as f64,
    }
}

/// Lexicon percentages in lexicon order, then l_AllPunc. Zero tokens make
/// every value 0.
pub fn lexicon_features(text: &PageText, lexicon: &Lexicon) -> Vec<(String, f64)> {
    let words = text.tokens.len();
    let mut out = Vec::with_capacity(lexicon.names().len() + 1);
    let counts = lexicon.count_matches(&text.tokens);
    for (name, count) in lexicon.names().iter().zip(counts) {
        let value = if words == 0 { 0.0 } else { 100.0 * count as f64 / words as f64 };
        out.push((format!("l_{name}"), value));
    }
    let all_punc = if words == 0 { 0.0 } else { 100.0 * text.punct_count as f64 / words as f64 };
    out.push(("l_AllPunc".to_string(), all_punc));
    out
}

/// The complete per-page text feature row in schema order.
pub fn page_text_features(
    page: &HtmlSnapshot,
    tagger: &dyn PosTagger,
    lexicon: &Lexicon,
) -> FeatureMap {
    let parsed = parse_page(page);
    let c = complexity_features(&parsed.text, tagger);
    let r = readability(&parsed.text);
    let h = structural_from_parsed(&parsed);
    let mut map = FeatureMap::new();
    for (name, value) in [
        ("c_word", c.c_word),
        ("c_char", c.c_char),
        ("c_sentence", c.c_sentence),
        ("c_noun", c.c_noun),
        ("c_verb", c.c_verb),
        ("c_adj", c.c_adj),
        ("c_oth", c.c_oth),
        ("c_gi", r.c_gi),
        ("c_smog", r.c_smog),
        ("c_fk", r.c_fk),
        ("h_link", h.h_link),
        ("h_p", h.h_p),
        ("h_oth_ul", h.h_oth_ul),
        ("h_script", h.h_script),
        ("h_vid", h.h_vid),
        ("h_aud", h.h_aud),
        ("h_obj", h.h_obj),
    ] {
        map.insert(name.to_string(), value);
    }
    for (name, value) in lexicon_features(&parsed.text, lexicon) {
        map.insert(name, value);
    }
    map
}

/// Per-feature mean over pages; with weights, the dwell-weighted mean.
/// All pages must share one schema.
pub fn aggregate_text(pages: &[FeatureMap], weights: Option<&[u64]>) -> Result<FeatureMap> {
    if pages.is_empty() {
        return Err(Error::invalid("no learning pages for participant"));
    }
    if let Some(w) = weights {
        if w.len() != pages.len() {
            return Err(Error::invalid(format!(
                "weight count {} does not match page count {}",
                w.len(),
                pages.len()
            )));
        }
        if w.iter().sum::<u64>() == 0 {
            return Err(Error::invalid("dwell weights sum to zero"));
        }
    }
    let schema: Vec<&String> = pages[0].keys().collect();
    for page in &pages[1..] {
        if page.len() != schema.len() || !page.keys().eq(schema.iter().copied()) {
            return Err(Error::invalid("pages disagree on text feature schema"));
        }
    }
    let mut out = FeatureMap::new();
    match weights {
        None => {
            let n = pages.len() as f64;
            for name in schema {
                let sum: f64 = pages.iter().map(|p| p[name]).sum();
                out.insert(name.clone(), sum / n);
            }
        }
        Some(w) => {
            let total: f64 = w.iter().map(|&x| x as f64).sum();
            for name in schema {
                let sum: f64 = pages.iter().zip(w).map(|(p, &wi)| p[name] * wi as f64).sum();
                out.insert(name.clone(), sum / total);
            }
        }
    }
    Ok(out)
}

/// Session-level text features: per-page extraction over the unique learning
/// URLs with snapshots, then aggregation.
pub fn text_features(
    session: &SessionRecord,
    config: &TextConfig,
    tagger: &dyn PosTagger,
    lexicon: &Lexicon,
) -> Result<FeatureMap> {
    let mut page_rows = Vec::new();
    let mut dwell_weights = Vec::new();
    for (url, dwell) in session.learning_urls(&config.blacklist) {
        let Some(snapshot) = session.pages.get(&url) else {
            continue;
        };
        if snapshot.looks_like_pdf() {
            continue;
        }
        page_rows.push(page_text_features(snapshot, tagger, lexicon));
        dwell_weights.push(dwell);
    }
    if page_rows.is_empty() {
        return Err(Error::session(
            &session.participant_id,
            "no learning pages for participant",
        ));
    }
    aggregate_text(&page_rows, config.dwell_weighted.then_some(&dwell_weights))
}
