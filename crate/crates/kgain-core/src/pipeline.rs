//! Pipeline orchestration: the resolved run configuration, per-session
//! feature extraction over a corpus, and joining features with labels into a
//! training dataset.

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::{default_blacklist, SessionRecord};
use crate::error::{Error, Result};
use crate::features::{FeatureMap, FeatureMatrix, FeatureSet};
use crate::forest::{HyperGrid, LabeledDataset, MaxFeatures};
use crate::labeling::{LabeledGain, CLASS_NAMES};
use crate::mmfeat::{multimedia_features, MmConfig, MM_FEATURE_NAMES};
use crate::textfeat::{text_features, Lexicon, PosTagger, TextConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Mean,
    DwellWeighted,
}

/// Grid lists as they appear in the config file. A max_depth of 0 stands for
/// an unbounded tree, since the file format has no null.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_split: Vec<usize>,
    pub max_features: Vec<String>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_trees: vec![100, 200, 500],
            max_depth: vec![5, 10, 0],
            min_samples_split: vec![5, 2],
            max_features: vec!["sqrt".into(), "third".into()],
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<HyperGrid> {
        let max_features = self
            .max_features
            .iter()
            .map(|s| s.parse::<MaxFeatures>())
            .collect::<Result<Vec<_>>>()?;
        Ok(HyperGrid {
            n_trees: self.n_trees.clone(),
            max_depth: self
                .max_depth
                .iter()
                .map(|&d| if d == 0 { None } else { Some(d) })
                .collect(),
            min_samples_split: self.min_samples_split.clone(),
            max_features,
        })
    }
}

/// Resolved run configuration. Every field has a default so a config file
/// only needs to name what it overrides; the CLI applies flag overrides on
/// top and echoes the result into the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub corpus_root: PathBuf,
    pub lexicon_path: PathBuf,
    pub blacklist: Vec<String>,
    pub min_image_side: u32,
    pub imgsize_in_pixels: bool,
    pub aggregation: Aggregation,
    pub features: FeatureSet,
    pub seed: u64,
    pub repetitions: usize,
    pub folds: usize,
    pub grid_folds: usize,
    pub stratified: bool,
    pub averaged: bool,
    pub nested: bool,
    pub grid: GridConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus_root: PathBuf::from("corpus"),
            lexicon_path: PathBuf::from("lexicon.txt"),
            blacklist: default_blacklist(),
            min_image_side: 100,
            imgsize_in_pixels: false,
            aggregation: Aggregation::Mean,
            features: FeatureSet::MiTi,
            seed: 42,
            repetitions: 10,
            folds: 10,
            grid_folds: 3,
            stratified: true,
            averaged: false,
            nested: false,
            grid: GridConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn mm_config(&self) -> MmConfig {
        MmConfig {
            blacklist: self.blacklist.clone(),
            min_image_side: self.min_image_side,
            imgsize_in_pixels: self.imgsize_in_pixels,
        }
    }

    pub fn text_config(&self) -> TextConfig {
        TextConfig {
            blacklist: self.blacklist.clone(),
            dwell_weighted: self.aggregation == Aggregation::DwellWeighted,
        }
    }
}

/// Feature vector for one session under the selected schema: the 13
/// multimedia features, the text features, or both concatenated in that
/// order.
pub fn session_features(
    session: &SessionRecord,
    set: FeatureSet,
    mm_config: &MmConfig,
    text_config: &TextConfig,
    tagger: &dyn PosTagger,
    lexicon: &Lexicon,
) -> Result<FeatureMap> {
    let mut map = FeatureMap::new();
    if matches!(set, FeatureSet::Mi | FeatureSet::MiTi) {
        let mm = multimedia_features(session, mm_config)?;
        for (name, value) in MM_FEATURE_NAMES.iter().zip(mm.as_row()) {
            map.insert((*name).to_string(), value);
        }
    }
    if matches!(set, FeatureSet::Ti | FeatureSet::MiTi) {
        for (name, value) in text_features(session, text_config, tagger, lexicon)? {
            map.insert(name, value);
        }
    }
    Ok(map)
}

#[derive(Debug)]
pub struct ExtractionOutput {
    pub matrix: FeatureMatrix,
    /// (participant id, error message) for sessions that failed extraction.
    pub failures: Vec<(String, String)>,
}

/// Extract the selected feature set for every session. Per-session failures
/// are collected, not fatal; the call errors only when no session succeeds
/// or the surviving rows disagree on schema.
pub fn extract_features(
    sessions: &[SessionRecord],
    config: &PipelineConfig,
    tagger: &dyn PosTagger,
    lexicon: &Lexicon,
) -> Result<ExtractionOutput> {
    let mm_config = config.mm_config();
    let text_config = config.text_config();
    let mut rows = Vec::with_capacity(sessions.len());
    let mut failures = Vec::new();
    for session in sessions {
        match session_features(session, config.features, &mm_config, &text_config, tagger, lexicon)
        {
            Ok(map) => rows.push((session.participant_id.clone(), map)),
            Err(e) => failures.push((session.participant_id.clone(), e.to_string())),
        }
    }
    if rows.is_empty() {
        return Err(Error::invalid("no session produced features"));
    }
    let matrix = FeatureMatrix::from_rows(rows)?;
    Ok(ExtractionOutput { matrix, failures })
}

/// Join a feature matrix with σ-classification labels by participant id.
pub fn assemble_dataset(
    matrix: &FeatureMatrix,
    labels: &[LabeledGain],
) -> Result<LabeledDataset> {
    let by_id: HashMap<&str, usize> = labels
        .iter()
        .map(|l| (l.participant_id.as_str(), l.label.index()))
        .collect();
    let mut label_indices = Vec::with_capacity(matrix.n_rows());
    for pid in &matrix.participant_ids {
        let idx = by_id
            .get(pid.as_str())
            .ok_or_else(|| Error::invalid(format!("no label for participant {pid}")))?;
        label_indices.push(*idx);
    }
    LabeledDataset::new(
        matrix.feature_names.clone(),
        matrix.rows.clone(),
        label_indices,
        CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
    )
}
