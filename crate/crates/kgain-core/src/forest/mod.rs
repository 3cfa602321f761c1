//! Random-forest classifier: bootstrap-sampled CART trees with per-node
//! feature subsampling, majority-vote prediction, MDI feature importance,
//! and grid-search tuning.
//!
//! Everything is reproducible from (dataset, hyperparameters, master seed):
//! each tree derives an independent generator from the master seed and its
//! index, so parallel fitting is schedule-independent.

mod grid;
mod tree;

pub use grid::{grid_search, GridSearchOutcome, HyperGrid};
pub use tree::{fit_tree, gini, Tree, TreeNode};

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Design matrix with labels attached, the unit every fit consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Class ids, indices into class_names.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("dataset has no rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "row count {} does not match label count {}",
                rows.len(),
                labels.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::invalid("dataset has no classes"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, schema has {} features",
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "row {i}, feature {}: non-finite value",
                    feature_names[j]
                )));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::invalid(format!(
                "label id {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self { feature_names, rows, labels, class_names })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row-subset keeping schema and classes.
    pub fn subset_rows(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaxFeatures {
    /// floor(sqrt(F)), at least 1.
    Sqrt,
    /// floor(F/3), at least 1.
    Third,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(&self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Third => n_features / 3,
            MaxFeatures::All => n_features,
            MaxFeatures::Fixed(k) => *k,
        };
        m.clamp(1, n_features.max(1))
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Third => f.write_str("third"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "third" => Ok(MaxFeatures::Third),
            "all" => Ok(MaxFeatures::All),
            other => other
                .parse::<usize>()
                .map(MaxFeatures::Fixed)
                .map_err(|_| Error::invalid(format!("bad max_features {other:?}"))),
        }
    }
}

impl Serialize for MaxFeatures {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MaxFeatures {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_trees: usize,
    /// None = unbounded depth.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    /// Fit each tree on a bootstrap resample (on by default); off makes a
    /// one-tree forest identical to a single fit_tree call.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

fn default_true() -> bool {
    true
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

/// Anything that maps a feature row to a class id. Lets evaluation accept
/// stub classifiers in tests.
pub trait Classifier: Send + Sync {
    fn predict_row(&self, row: &[f64]) -> usize;
}

/// A fitted forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub hyperparams: HyperParams,
    pub master_seed: u64,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub trees: Vec<Tree>,
}

impl Classifier for ForestModel {
    fn predict_row(&self, row: &[f64]) -> usize {
        ForestModel::predict_row(self, row)
    }
}

impl ForestModel {
    /// Majority vote over trees, ties to the lowest class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.class_names.len()];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        tree::argmax_lowest(&votes)
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, format!("{}\n", self.to_json()?)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// The generator a tree's randomness comes from: one ChaCha stream per tree
/// index, independent of every other tree.
fn tree_rng(master_seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(tree_index as u64 + 1);
    rng
}

/// Fit a forest. Trees run in parallel; output is bit-identical across
/// thread counts because every tree owns its own derived generator and the
/// collected order is by tree index.
pub fn fit_forest(data: &LabeledDataset, params: &HyperParams, master_seed: u64) -> Result<ForestModel> {
    if params.n_trees == 0 {
        return Err(Error::invalid("n_trees must be positive"));
    }
    if params.min_samples_split < 2 {
        return Err(Error::invalid("min_samples_split must be at least 2"));
    }
    let n = data.n_rows();
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(master_seed, i);
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let tree_seed: u64 = rng.gen();
            fit_tree(data, &indices, params, tree_seed)
        })
        .collect();
    Ok(ForestModel {
        hyperparams: *params,
        master_seed,
        feature_names: data.feature_names.clone(),
        class_names: data.class_names.clone(),
        trees,
    })
}

/// Mean decrease in impurity, normalized to sum to 1 (all-zero stays zero).
/// Keyed and ordered by the model's feature names.
pub fn mdi_importance(model: &ForestModel) -> IndexMap<String, f64> {
    let n_features = model.feature_names.len();
    let mut mean = vec![0.0f64; n_features];
    for t in &model.trees {
        for (acc, v) in mean.iter_mut().zip(t.importance_sums(n_features)) {
            *acc += v;
        }
    }
    let n_trees = model.trees.len() as f64;
    for v in &mut mean {
        *v /= n_trees;
    }
    let total: f64 = mean.iter().sum();
    if total > 0.0 {
        for v in &mut mean {
            *v /= total;
        }
    }
    model.feature_names.iter().cloned().zip(mean).collect()
}
