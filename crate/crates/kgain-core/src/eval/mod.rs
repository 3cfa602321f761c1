//! Model evaluation: seeded k-fold splitting, repeated cross-validation with
//! a pooled confusion matrix, metric arithmetic, and report rendering.

mod cv;
mod folds;
mod report;

pub use cv::{
    averaged_metrics, cross_validate, cross_validate_with, ClassMetrics, ConfusionMatrix,
    CvOutcome, EvalOptions, FoldRecord, MatrixMetrics,
};
pub use folds::kfold_splits;
pub use report::{
    importance_csv_string, percent, rank_importance, render_importance_table,
    render_metrics_table, render_report, write_importance_csv, EvalReport, ReportRow,
};
