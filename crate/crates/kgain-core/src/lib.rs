//! Batch pipeline for predicting knowledge gain from Web-search learning
//! sessions.
//!
//! The crate turns recorded search sessions (focus timelines, per-second
//! screen-frame layout annotations, saved HTML pages, pre/post test scores)
//! into per-participant feature vectors, assigns low/moderate/high
//! knowledge-gain labels, and trains and evaluates a random-forest classifier
//! with MDI feature importance.
//!
//! Modules follow the pipeline stages:
//!
//! - [`corpus`]: on-disk session corpus parsing and validation
//! - [`mmfeat`]: multimedia features (layout coverage, image-type exposure)
//! - [`textfeat`]: text features (complexity, readability, HTML structure,
//!   lexicon categories)
//! - [`labeling`]: knowledge gain and sigma classification
//! - [`forest`]: random-forest classifier with MDI importance and grid search
//! - [`eval`]: repeated k-fold cross-validation, metrics, report rendering
//! - [`synthgen`]: deterministic synthetic corpora with planted effects
//! - [`pipeline`]: configuration and end-to-end orchestration

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod geometry;
pub mod labeling;
pub mod mmfeat;
pub mod pipeline;
pub mod synthgen;
pub mod textfeat;

pub use error::{Error, Result};

/// Registry of derive_seed tags; one per randomized stage so streams never
/// collide between stages.
pub(crate) mod seed_tags {
    pub const GRID_FOLDS: u64 = 1;
    pub const GRID_FIT: u64 = 2;
    pub const CV_FOLDS: u64 = 3;
    pub const CV_FIT: u64 = 4;
    pub const SYNTH: u64 = 5;
}

/// Splitmix64-style seed derivation so every pipeline stage gets an
/// independent, reproducible stream from one master seed.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
