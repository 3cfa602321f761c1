//! Feature schema plumbing: named per-participant feature rows, the
//! MI/TI/MI&TI selector, and the features.csv representation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Ordered feature-name → value map for one participant.
pub type FeatureMap = IndexMap<String, f64>;

/// Which feature block(s) go into the design matrix. Mirrors the three
/// result rows MI&TI / TI / MI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    Mi,
    Ti,
    MiTi,
}

impl FeatureSet {
    /// Display tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            FeatureSet::Mi => "MI",
            FeatureSet::Ti => "TI",
            FeatureSet::MiTi => "MI&TI",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "mi" => Ok(FeatureSet::Mi),
            "ti" => Ok(FeatureSet::Ti),
            "miti" | "mi&ti" | "mi+ti" => Ok(FeatureSet::MiTi),
            other => Err(Error::invalid(format!(
                "unknown feature set {other:?} (expected mi, ti, or miti)"
            ))),
        }
    }
}

impl serde::Serialize for FeatureSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(match self {
            FeatureSet::Mi => "mi",
            FeatureSet::Ti => "ti",
            FeatureSet::MiTi => "miti",
        })
    }
}

impl<'de> serde::Deserialize<'de> for FeatureSet {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense participants × features matrix with row and column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub participant_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Assemble from per-participant maps. Every map must carry the same
    /// names in the same order; values must be finite.
    pub fn from_rows(entries: Vec<(String, FeatureMap)>) -> Result<Self> {
        let mut iter = entries.into_iter();
        let Some((first_id, first_map)) = iter.next() else {
            return Err(Error::invalid("cannot build a feature matrix from zero rows"));
        };
        let feature_names: Vec<String> = first_map.keys().cloned().collect();
        let mut matrix = FeatureMatrix {
            feature_names,
            participant_ids: Vec::new(),
            rows: Vec::new(),
        };
        matrix.push_row(first_id, &first_map)?;
        for (id, map) in iter {
            matrix.push_row(id, &map)?;
        }
        Ok(matrix)
    }

    fn push_row(&mut self, id: String, map: &FeatureMap) -> Result<()> {
        if map.len() != self.feature_names.len()
            || !map.keys().eq(self.feature_names.iter())
        {
            return Err(Error::invalid(format!(
                "participant {id}: feature names disagree with the matrix schema"
            )));
        }
        let row: Vec<f64> = map.values().copied().collect();
        for (name, value) in self.feature_names.iter().zip(&row) {
            if !value.is_finite() {
                return Err(Error::invalid(format!(
                    "participant {id}: feature {name} is not finite ({value})"
                )));
            }
        }
        self.participant_ids.push(id);
        self.rows.push(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Column-subset by feature names, preserving the requested order.
    pub fn subset(&self, names: &[String]) -> Result<FeatureMatrix> {
        let indices: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::invalid(format!("feature {n:?} not present in matrix")))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            feature_names: names.to_vec(),
            participant_ids: self.participant_ids.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| indices.iter().map(|&i| row[i]).collect())
                .collect(),
        })
    }

    /// Write as CSV: header `participant_id,<features...>`, shortest
    /// round-trip float formatting so reruns are byte-identical.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(Error::Csv)?;
        let mut header = Vec::with_capacity(self.n_features() + 1);
        header.push("participant_id".to_string());
        header.extend(self.feature_names.iter().cloned());
        writer.write_record(&header)?;
        for (id, row) in self.participant_ids.iter().zip(&self.rows) {
            let mut record = Vec::with_capacity(row.len() + 1);
            record.push(id.clone());
            record.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("cannot open features file: {e}"),
            })?;
        let header = reader.headers().map_err(Error::Csv)?.clone();
        if header.is_empty() || &header[0] != "participant_id" {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 1,
                message: "first column must be participant_id".into(),
            });
        }
        let feature_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut participant_ids = Vec::new();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(Error::Csv)?;
            if record.len() != feature_names.len() + 1 {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!(
                        "expected {} fields, found {}",
                        feature_names.len() + 1,
                        record.len()
                    ),
                });
            }
            participant_ids.push(record[0].to_string());
            let row: Vec<f64> = record
                .iter()
                .skip(1)
                .map(|field| {
                    field.parse::<f64>().map_err(|e| Error::Malformed {
                        path: path.to_path_buf(),
                        line: i + 2,
                        message: format!("bad number {field:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Ok(FeatureMatrix { feature_names, participant_ids, rows })
    }
}
