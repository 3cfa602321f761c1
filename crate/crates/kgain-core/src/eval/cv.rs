//! Confusion-matrix metrics and repeated k-fold cross-validation.
//!
//! The default protocol pools one confusion matrix over every fold of every
//! repetition and computes metrics from the pooled counts; per-fold averaging
//! is available behind [`EvalOptions::averaged`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, Classifier, HyperParams, LabeledDataset};
use crate::{derive_seed, seed_tags};

use super::folds::kfold_splits;

/// Row-indexed by true class, column-indexed by predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        Self { classes, counts: vec![vec![0; k]; k] }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Per-class precision/recall/F1, their macro averages, and accuracy.
    /// A class never predicted gets precision 0, a class absent from the test
    /// data gets recall 0; both cases are reported as warnings rather than NaN.
    pub fn metrics(&self) -> MatrixMetrics {
        let k = self.classes.len();
        let mut warnings = Vec::new();
        let mut per_class = Vec::with_capacity(k);
        for c in 0..k {
            let tp = self.counts[c][c] as f64;
            let col: u64 = (0..k).map(|r| self.counts[r][c]).sum();
            let row: u64 = self.counts[c].iter().sum();
            let precision = if col == 0 {
                warnings.push(format!(
                    "class \"{}\" was never predicted; precision set to 0",
                    self.classes[c]
                ));
                0.0
            } else {
                tp / col as f64
            };
            let recall = if row == 0 {
                warnings.push(format!(
                    "class \"{}\" is absent from the test data; recall set to 0",
                    self.classes[c]
                ));
                0.0
            } else {
                tp / row as f64
            };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class.push(ClassMetrics { precision, recall, f1 });
        }
        let total = self.total();
        let accuracy = if total == 0 {
            warnings.push("empty confusion matrix; accuracy set to 0".into());
            0.0
        } else {
            let hits: u64 = (0..k).map(|c| self.counts[c][c]).sum();
            hits as f64 / total as f64
        };
        let kf = k as f64;
        MatrixMetrics {
            classes: self.classes.clone(),
            macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / kf,
            macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / kf,
            macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / kf,
            per_class,
            accuracy,
            warnings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetrics {
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub warnings: Vec<String>,
}

/// Everything needed to replay one fold of one repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub repetition: usize,
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub true_labels: Vec<usize>,
    pub predicted: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub stratified: bool,
    pub averaged: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { stratified: true, averaged: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub pooled: ConfusionMatrix,
    pub fold_records: Vec<FoldRecord>,
    pub repetitions: usize,
    pub folds: usize,
    pub stratified: bool,
}

/// Repeated stratified k-fold CV with a caller-supplied model fitter.
/// Fold assignment reseeds per repetition and model fitting reseeds per
/// (repetition, fold), so the whole run is a pure function of `seed`.
pub fn cross_validate_with(
    data: &LabeledDataset,
    repetitions: usize,
    k: usize,
    seed: u64,
    options: EvalOptions,
    fit: &dyn Fn(&LabeledDataset, u64) -> Result<Box<dyn Classifier>>,
) -> Result<CvOutcome> {
    if repetitions == 0 {
        return Err(Error::invalid("need at least 1 repetition"));
    }
    let n = data.n_rows();
    let mut pooled = ConfusionMatrix::new(data.class_names.clone());
    let mut fold_records = Vec::with_capacity(repetitions * k);
    for rep in 0..repetitions {
        let splits = kfold_splits(
            n,
            k,
            &data.labels,
            derive_seed(seed, seed_tags::CV_FOLDS, rep as u64),
            options.stratified,
        )?;
        for (fold, (train, test)) in splits.into_iter().enumerate() {
            let train_data = data.subset_rows(&train);
            let model = fit(
                &train_data,
                derive_seed(seed, seed_tags::CV_FIT, (rep * k + fold) as u64),
            )?;
            let mut true_labels = Vec::with_capacity(test.len());
            let mut predicted = Vec::with_capacity(test.len());
            for &i in &test {
                let pred = model.predict_row(&data.rows[i]);
                pooled.record(data.labels[i], pred);
                true_labels.push(data.labels[i]);
                predicted.push(pred);
            }
            fold_records.push(FoldRecord {
                repetition: rep,
                fold,
                test_indices: test,
                true_labels,
                predicted,
            });
        }
    }
    Ok(CvOutcome { pooled, fold_records, repetitions, folds: k, stratified: options.stratified })
}

/// Repeated k-fold CV of a random forest with the given hyperparameters.
pub fn cross_validate(
    data: &LabeledDataset,
    params: &HyperParams,
    repetitions: usize,
    k: usize,
    seed: u64,
    options: EvalOptions,
) -> Result<CvOutcome> {
    let params = *params;
    cross_validate_with(data, repetitions, k, seed, options, &move |train, s| {
        fit_forest(train, &params, s).map(|m| Box::new(m) as Box<dyn Classifier>)
    })
}

/// Mean of the per-fold metrics (the alternative to pooling).
pub fn averaged_metrics(outcome: &CvOutcome) -> MatrixMetrics {
    let classes = outcome.pooled.classes.clone();
    let k = classes.len();
    let mut acc = MatrixMetrics {
        classes: classes.clone(),
        per_class: vec![ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0 }; k],
        macro_precision: 0.0,
        macro_recall: 0.0,
        macro_f1: 0.0,
        accuracy: 0.0,
        warnings: Vec::new(),
    };
    let n_folds = outcome.fold_records.len() as f64;
    for record in &outcome.fold_records {
        let mut cm = ConfusionMatrix::new(classes.clone());
        for (&t, &p) in record.true_labels.iter().zip(&record.predicted) {
            cm.record(t, p);
        }
        let m = cm.metrics();
        for c in 0..k {
            acc.per_class[c].precision += m.per_class[c].precision / n_folds;
            acc.per_class[c].recall += m.per_class[c].recall / n_folds;
            acc.per_class[c].f1 += m.per_class[c].f1 / n_folds;
        }
        acc.macro_precision += m.macro_precision / n_folds;
        acc.macro_recall += m.macro_recall / n_folds;
        acc.macro_f1 += m.macro_f1 / n_folds;
        acc.accuracy += m.accuracy / n_folds;
        for w in m.warnings {
            if !acc.warnings.contains(&w) {
                acc.warnings.push(w);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSES: [&str; 3] = ["low", "moderate", "high"];

    fn class_names() -> Vec<String> {
        CLASSES.iter().map(|s| s.to_string()).collect()
    }

    fn oracle_matrix() -> ConfusionMatrix {
        ConfusionMatrix {
            classes: class_names(),
            counts: vec![vec![5, 2, 1], vec![1, 6, 2], vec![0, 3, 4]],
        }
    }

    struct Constant(usize);
    impl Classifier for Constant {
        fn predict_row(&self, _row: &[f64]) -> usize {
            self.0
        }
    }

    struct Lookup;
    impl Classifier for Lookup {
        fn predict_row(&self, row: &[f64]) -> usize {
            row[0] as usize
        }
    }

    fn labeled_rows(counts: [usize; 3]) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (class, &count) in counts.iter().enumerate() {
            for i in 0..count {
                rows.push(vec![class as f64, i as f64]);
                labels.push(class);
            }
        }
        LabeledDataset::new(
            vec!["f0".into(), "f1".into()],
            rows,
            labels,
            class_names(),
        )
        .unwrap()
    }

    #[test]
    fn metrics_match_hand_arithmetic() {
        let m = oracle_matrix().metrics();
        assert_eq!(m.accuracy, 15.0 / 24.0);
        assert_eq!(m.per_class[0].precision, 5.0 / 6.0);
        assert_eq!(m.per_class[0].recall, 5.0 / 8.0);
        assert_eq!(m.per_class[1].precision, 6.0 / 11.0);
        assert_eq!(m.per_class[1].recall, 6.0 / 9.0);
        assert_eq!(m.per_class[2].precision, 4.0 / 7.0);
        assert_eq!(m.per_class[2].recall, 4.0 / 7.0);
        assert!((m.per_class[0].f1 - 0.7142857142857143).abs() < 1e-12);
        assert!((m.per_class[1].f1 - 0.6).abs() < 1e-12);
        assert!((m.per_class[2].f1 - 0.5714285714285714).abs() < 1e-12);
        assert!((m.macro_precision - 0.65007215007215).abs() < 1e-12);
        assert!((m.macro_recall - 0.621031746031746).abs() < 1e-12);
        assert!((m.macro_f1 - 0.6285714285714286).abs() < 1e-12);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn constant_moderate_on_study_distribution() {
        let data = labeled_rows([44, 42, 27]);
        let outcome = cross_validate_with(
            &data,
            1,
            10,
            99,
            EvalOptions::default(),
            &|_train, _seed| Ok(Box::new(Constant(1))),
        )
        .unwrap();
        assert_eq!(
            outcome.pooled.counts,
            vec![vec![0, 44, 0], vec![0, 42, 0], vec![0, 27, 0]]
        );
        let m = outcome.pooled.metrics();
        assert_eq!(m.accuracy, 42.0 / 113.0);
        assert_eq!(m.accuracy, 0.37168141592920356);
        assert_eq!(m.per_class[1].recall, 1.0);
        assert_eq!(m.per_class[0].precision, 0.0);
        assert_eq!(m.warnings.len(), 2);
        assert!(m.warnings[0].contains("low"));
        assert!(m.warnings[1].contains("high"));
    }

    #[test]
    fn perfect_stub_scores_one() {
        let data = labeled_rows([8, 7, 6]);
        let outcome = cross_validate_with(
            &data,
            2,
            3,
            5,
            EvalOptions::default(),
            &|_train, _seed| Ok(Box::new(Lookup)),
        )
        .unwrap();
        let m = outcome.pooled.metrics();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(outcome.pooled.total(), 2 * 21);
        for c in 0..3 {
            for p in 0..3 {
                if c != p {
                    assert_eq!(outcome.pooled.counts[c][p], 0);
                }
            }
        }
    }

    #[test]
    fn fold_records_partition_each_repetition() {
        let data = labeled_rows([5, 5, 5]);
        let outcome = cross_validate_with(
            &data,
            3,
            5,
            1,
            EvalOptions::default(),
            &|_train, _seed| Ok(Box::new(Constant(0))),
        )
        .unwrap();
        assert_eq!(outcome.fold_records.len(), 15);
        for rep in 0..3 {
            let mut seen: Vec<usize> = outcome
                .fold_records
                .iter()
                .filter(|r| r.repetition == rep)
                .flat_map(|r| r.test_indices.iter().copied())
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..15).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cross_validation_is_seed_deterministic() {
        let data = labeled_rows([10, 9, 8]);
        let params = HyperParams { n_trees: 15, ..HyperParams::default() };
        let a = cross_validate(&data, &params, 2, 3, 7, EvalOptions::default()).unwrap();
        let b = cross_validate(&data, &params, 2, 3, 7, EvalOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forest_cv_learns_separable_data() {
        let data = labeled_rows([10, 10, 10]);
        let params = HyperParams { n_trees: 25, ..HyperParams::default() };
        let outcome =
            cross_validate(&data, &params, 1, 3, 3, EvalOptions::default()).unwrap();
        let m = outcome.pooled.metrics();
        assert!(m.accuracy > 0.9, "accuracy {}", m.accuracy);
    }

    #[test]
    fn averaged_metrics_match_pooled_for_a_constant_classifier() {
        // constant predictions and stratified folds make every fold matrix a
        // scaled copy of the pooled one, so the averages coincide
        let data = labeled_rows([12, 9, 6]);
        let outcome = cross_validate_with(
            &data,
            2,
            3,
            4,
            EvalOptions::default(),
            &|_train, _seed| Ok(Box::new(Constant(1))),
        )
        .unwrap();
        let pooled = outcome.pooled.metrics();
        let averaged = averaged_metrics(&outcome);
        assert!((pooled.accuracy - averaged.accuracy).abs() < 1e-12);
        assert!((pooled.per_class[1].recall - averaged.per_class[1].recall).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_yields_zero_accuracy_with_warning() {
        let m = ConfusionMatrix::new(class_names()).metrics();
        assert_eq!(m.accuracy, 0.0);
        assert!(m.warnings.iter().any(|w| w.contains("empty")));
    }
}
