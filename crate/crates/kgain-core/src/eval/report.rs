//! Plain-text and machine-readable evaluation outputs: the per-class metrics
//! grid, the importance ranking, and the JSON report.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::HyperParams;

use super::cv::{averaged_metrics, CvOutcome, EvalOptions, FoldRecord, MatrixMetrics};

/// One row of the metrics grid, e.g. the MI&TI run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub metrics: MatrixMetrics,
}

/// Fraction as a percentage with one decimal: 0.37168… becomes "37.2".
pub fn percent(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

fn row_rank(label: &str) -> usize {
    match label {
        "MI&TI" => 0,
        "TI" => 1,
        "MI" => 2,
        _ => 3,
    }
}

fn pad(text: &str, width: usize, right_align: bool) -> String {
    let fill = width.saturating_sub(text.chars().count());
    if right_align {
        format!("{}{}", " ".repeat(fill), text)
    } else {
        format!("{}{}", text, " ".repeat(fill))
    }
}

fn render_grid(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let render_line = |cells: &[String], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&pad(cell, widths[i], i > 0));
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    render_line(header, &mut out);
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in rows {
        render_line(row, &mut out);
    }
    out
}

/// The metrics grid: one line per feature set with per-class precision,
/// recall and F1, the macro averages, and accuracy, all as percentages with
/// one decimal. Rows are printed in the fixed order MI&TI, TI, MI.
pub fn render_metrics_table(rows: &[ReportRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("no metric rows to render"));
    }
    let classes = &rows[0].metrics.classes;
    if rows.iter().any(|r| &r.metrics.classes != classes) {
        return Err(Error::invalid("metric rows disagree on class names"));
    }
    let mut ordered: Vec<&ReportRow> = rows.iter().collect();
    ordered.sort_by_key(|r| row_rank(&r.label));
    let mut header = vec!["features".to_string()];
    for class in classes {
        header.push(format!("{class}_P"));
        header.push(format!("{class}_R"));
        header.push(format!("{class}_F1"));
    }
    header.extend(
        ["macro_P", "macro_R", "macro_F1", "accuracy"].map(str::to_string),
    );
    let mut body = Vec::new();
    for row in ordered {
        let m = &row.metrics;
        let mut cells = vec![row.label.clone()];
        for c in &m.per_class {
            cells.push(percent(c.precision));
            cells.push(percent(c.recall));
            cells.push(percent(c.f1));
        }
        cells.push(percent(m.macro_precision));
        cells.push(percent(m.macro_recall));
        cells.push(percent(m.macro_f1));
        cells.push(percent(m.accuracy));
        body.push(cells);
    }
    Ok(render_grid(&header, &body))
}

/// Importances ranked descending; ties keep the schema order. Returns
/// (rank, name, score) with rank starting at 1.
pub fn rank_importance(importance: &IndexMap<String, f64>) -> Vec<(usize, String, f64)> {
    let mut entries: Vec<(usize, &String, f64)> = importance
        .iter()
        .enumerate()
        .map(|(i, (name, &score))| (i, name, score))
        .collect();
    entries.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
    entries
        .into_iter()
        .enumerate()
        .map(|(rank, (_, name, score))| (rank + 1, name.clone(), score))
        .collect()
}

/// Importance ranking as text: the full list when there are at most 20
/// features, otherwise the top 10 and bottom 10 separated by an ellipsis.
pub fn render_importance_table(importance: &IndexMap<String, f64>) -> String {
    let ranked = rank_importance(importance);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let push = |rows: &mut Vec<Vec<String>>, entry: &(usize, String, f64)| {
        rows.push(vec![entry.0.to_string(), entry.1.clone(), format!("{:.3}", entry.2)]);
    };
    if ranked.len() <= 20 {
        for entry in &ranked {
            push(&mut rows, entry);
        }
    } else {
        for entry in &ranked[..10] {
            push(&mut rows, entry);
        }
        rows.push(vec!["...".into(), "...".into(), "...".into()]);
        for entry in &ranked[ranked.len() - 10..] {
            push(&mut rows, entry);
        }
    }
    let header = ["rank", "feature", "mdi"].map(str::to_string);
    render_grid(&header, &rows)
}

/// The complete plain-text report: metrics grid plus, when a model was
/// trained, the importance ranking.
pub fn render_report(
    rows: &[ReportRow],
    importance: Option<&IndexMap<String, f64>>,
) -> Result<String> {
    let mut out = String::from("Classification performance (percent)\n\n");
    out.push_str(&render_metrics_table(rows)?);
    if let Some(importance) = importance {
        out.push_str("\nFeature importance (MDI)\n\n");
        out.push_str(&render_importance_table(importance));
    }
    Ok(out)
}

/// Full ranking as CSV with header `rank,feature,mdi`; scores use the
/// shortest round-trip decimal form.
pub fn importance_csv_string(importance: &IndexMap<String, f64>) -> String {
    let mut out = String::from("rank,feature,mdi\n");
    for (rank, name, score) in rank_importance(importance) {
        out.push_str(&format!("{rank},{name},{score}\n"));
    }
    out
}

pub fn write_importance_csv(importance: &IndexMap<String, f64>, path: &Path) -> Result<()> {
    std::fs::write(path, importance_csv_string(importance))
        .map_err(|e| Error::io(path, e))
}

/// Machine-readable evaluation result (report.json).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub feature_set: String,
    pub seed: u64,
    pub repetitions: usize,
    pub folds: usize,
    pub stratified: bool,
    pub averaged: bool,
    pub hyperparams: HyperParams,
    pub n_rows: usize,
    pub classes: Vec<String>,
    pub pooled_counts: Vec<Vec<u64>>,
    pub metrics: MatrixMetrics,
    pub fold_records: Vec<FoldRecord>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn new(
        feature_set: &str,
        seed: u64,
        params: &HyperParams,
        options: EvalOptions,
        outcome: &CvOutcome,
        n_rows: usize,
    ) -> Self {
        let metrics = if options.averaged {
            averaged_metrics(outcome)
        } else {
            outcome.pooled.metrics()
        };
        let warnings = metrics.warnings.clone();
        Self {
            feature_set: feature_set.to_string(),
            seed,
            repetitions: outcome.repetitions,
            folds: outcome.folds,
            stratified: outcome.stratified,
            averaged: options.averaged,
            hyperparams: *params,
            n_rows,
            classes: outcome.pooled.classes.clone(),
            pooled_counts: outcome.pooled.counts.clone(),
            metrics,
            fold_records: outcome.fold_records.clone(),
            warnings,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
