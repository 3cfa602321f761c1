//! Exhaustive grid search over forest hyperparameters, scored by k-fold
//! cross-validation accuracy on the supplied data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::kfold_splits;
use crate::{derive_seed, seed_tags};

use super::{fit_forest, HyperParams, LabeledDataset, MaxFeatures};

/// Candidate lists, one per hyperparameter. Enumeration order is the given
/// list order, nested with n_trees outermost and max_features innermost;
/// ties in CV accuracy go to the earliest candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_split: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
}

impl Default for HyperGrid {
    /// The default grid is ordered smallest model first in every dimension,
    /// so accuracy ties resolve to the cheapest configuration.
    fn default() -> Self {
        Self {
            n_trees: vec![100, 200, 500],
            max_depth: vec![Some(5), Some(10), None],
            min_samples_split: vec![5, 2],
            max_features: vec![MaxFeatures::Sqrt, MaxFeatures::Third],
        }
    }
}

impl HyperGrid {
    /// A 1-point grid.
    pub fn single(params: HyperParams) -> Self {
        Self {
            n_trees: vec![params.n_trees],
            max_depth: vec![params.max_depth],
            min_samples_split: vec![params.min_samples_split],
            max_features: vec![params.max_features],
        }
    }

    /// All candidates in enumeration order.
    pub fn candidates(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &min_samples_split in &self.min_samples_split {
                    for &max_features in &self.max_features {
                        out.push(HyperParams {
                            n_trees,
                            max_depth,
                            min_samples_split,
                            max_features,
                            bootstrap: true,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.candidates().is_empty()
    }
}

/// Result of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchOutcome {
    pub best: HyperParams,
    pub best_accuracy: f64,
    /// Every candidate with its CV accuracy, in enumeration order.
    pub evaluated: Vec<(HyperParams, f64)>,
}

/// Evaluate every grid point on the same stratified folds with the same fit
/// seeds and return the accuracy argmax (ties to enumeration order).
pub fn grid_search(
    data: &LabeledDataset,
    grid: &HyperGrid,
    folds: usize,
    seed: u64,
) -> Result<GridSearchOutcome> {
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    if folds < 2 {
        return Err(Error::invalid(format!("grid search needs at least 2 folds, got {folds}")));
    }
    let n = data.n_rows();
    let splits = kfold_splits(
        n,
        folds,
        &data.labels,
        derive_seed(seed, seed_tags::GRID_FOLDS, 0),
        true,
    )?;
    // one materialization of the fold datasets serves every candidate
    let fold_data: Vec<(LabeledDataset, Vec<usize>)> = splits
        .into_iter()
        .map(|(train, test)| (data.subset_rows(&train), test))
        .collect();

    let mut evaluated = Vec::with_capacity(candidates.len());
    let mut best: Option<(HyperParams, f64)> = None;
    for params in candidates {
        let mut correct = 0usize;
        for (fold_idx, (train, test)) in fold_data.iter().enumerate() {
            let model = fit_forest(
                train,
                &params,
                derive_seed(seed, seed_tags::GRID_FIT, fold_idx as u64),
            )?;
            correct += test
                .iter()
                .filter(|&&i| model.predict_row(&data.rows[i]) == data.labels[i])
                .count();
        }
        let accuracy = correct as f64 / n as f64;
        if best.as_ref().is_none_or(|(_, b)| accuracy > *b) {
            best = Some((params, accuracy));
        }
        evaluated.push((params, accuracy));
    }
    let (best, best_accuracy) = best.expect("non-empty candidate list");
    Ok(GridSearchOutcome { best, best_accuracy, evaluated })
}
