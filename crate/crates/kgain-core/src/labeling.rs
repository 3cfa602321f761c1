//! Knowledge-gain labels via standard-deviation classification: low if the
//! gain lies more than half a standard deviation below the corpus mean, high
//! if more than half above, moderate otherwise (boundaries included).
//!
//! The comparisons are carried out in exact integer arithmetic, so boundary
//! cases and the translation/scale invariance of the rule hold without any
//! floating-point slack: with d_i = n·x_i − Σx (the deviation scaled by n),
//! x_i − X̄ < −σ/2 is equivalent to d_i < 0 and 4·n·d_i² > Σd_j².

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::SessionRecord;
use crate::error::{Error, Result};

/// Class order everywhere: low = 0, moderate = 1, high = 2.
pub const CLASS_NAMES: [&str; 3] = ["low", "moderate", "high"];

/// Knowledge-gain class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Low,
    Moderate,
    High,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Low, Label::Moderate, Label::High];

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(CLASS_NAMES[self.index()])
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Label::Low),
            "moderate" => Ok(Label::Moderate),
            "high" => Ok(Label::High),
            other => Err(Error::invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// One participant's knowledge gain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGain {
    pub participant_id: String,
    pub kg: i32,
}

/// A gain with its assigned class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGain {
    pub participant_id: String,
    pub kg: i32,
    pub label: Label,
}

/// Corpus statistics behind one classification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub sigma: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    /// Low/moderate/high counts in class order.
    pub counts: [usize; 3],
}

/// Gains in session order.
pub fn gains_from_sessions(sessions: &[SessionRecord]) -> Vec<KnowledgeGain> {
    sessions
        .iter()
        .map(|s| KnowledgeGain {
            participant_id: s.participant_id.clone(),
            kg: s.knowledge_gain(),
        })
        .collect()
}

/// Label a raw gain vector. Exact in integer arithmetic; inputs must stay
/// within ±2^40 with at most 2^20 entries so the i128 intermediates cannot
/// overflow (session gains are within ±10).
pub fn sigma_labels(values: &[i64]) -> Result<Vec<Label>> {
    if values.len() < 2 {
        return Err(Error::invalid(format!(
            "sigma classification needs at least 2 gains, got {}",
            values.len()
        )));
    }
    let n = values.len() as i128;
    let total: i128 = values.iter().map(|&x| x as i128).sum();
    let deviations: Vec<i128> = values.iter().map(|&x| n * x as i128 - total).collect();
    let sum_sq: i128 = deviations.iter().map(|&d| d * d).sum();
    Ok(deviations
        .iter()
        .map(|&d| {
            // |x_i − X̄| > σ/2  ⟺  4·n·d² > Σd², strict so boundaries stay moderate
            if 4 * n * d * d > sum_sq {
                if d < 0 {
                    Label::Low
                } else {
                    Label::High
                }
            } else {
                Label::Moderate
            }
        })
        .collect())
}

/// Threshold rule on already-known corpus statistics; the float counterpart
/// of sigma_labels used for reporting and spot checks.
pub fn classify_with_stats(x: f64, mean: f64, sigma: f64) -> Label {
    if x < mean - sigma / 2.0 {
        Label::Low
    } else if x > mean + sigma / 2.0 {
        Label::High
    } else {
        Label::Moderate
    }
}

/// Classify a corpus of gains.
pub fn sigma_classify(gains: &[KnowledgeGain]) -> Result<(Vec<LabeledGain>, SigmaSummary)> {
    let values: Vec<i64> = gains.iter().map(|g| g.kg as i64).collect();
    let labels = sigma_labels(&values)?;
    let n = gains.len() as f64;
    let mean = values.iter().map(|&x| x as f64).sum::<f64>() / n;
    let variance = values.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    let sigma = variance.sqrt();
    let mut counts = [0usize; 3];
    let labeled: Vec<LabeledGain> = gains
        .iter()
        .zip(&labels)
        .map(|(g, &label)| {
            counts[label.index()] += 1;
            LabeledGain {
                participant_id: g.participant_id.clone(),
                kg: g.kg,
                label,
            }
        })
        .collect();
    Ok((
        labeled,
        SigmaSummary {
            mean,
            sigma,
            low_threshold: mean - sigma / 2.0,
            high_threshold: mean + sigma / 2.0,
            counts,
        },
    ))
}

/// Write labels.csv (header participant_id,kg,label).
pub fn write_labels_csv(path: &Path, labeled: &[LabeledGain]) -> Result<()> {
    let mut out = String::from("participant_id,kg,label\n");
    for row in labeled {
        out.push_str(&format!("{},{},{}\n", row.participant_id, row.kg, row.label));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read labels.csv back.
pub fn read_labels_csv(path: &Path) -> Result<Vec<LabeledGain>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: format!("cannot open labels file: {e}"),
        })?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(Error::Csv)?;
        let parse = |msg: String| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 2,
            message: msg,
        };
        if record.len() != 3 {
            return Err(parse(format!("expected 3 fields, found {}", record.len())));
        }
        rows.push(LabeledGain {
            participant_id: record[0].to_string(),
            kg: record[1].parse().map_err(|e| parse(format!("bad kg: {e}")))?,
            label: record[2].parse().map_err(|_| parse(format!("unknown label {:?}", &record[2])))?,
        });
    }
    Ok(rows)
}
