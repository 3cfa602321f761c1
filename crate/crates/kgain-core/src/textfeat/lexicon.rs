//! Word-category lexicon behind the l_ feature family.
//!
//! File format, one category per block:
//!
//! ```text
//! # comment
//! [category_name]
//! word
//! stem*
//! ```
//!
//! A trailing `*` makes a prefix pattern. Matching is case-insensitive on the
//! token side; a token counts at most once per category however many patterns
//! it matches.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parsed lexicon with category order preserved.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    names: Vec<String>,
    /// literal word → category indices
    literals: HashMap<String, Vec<usize>>,
    /// prefix (without `*`) → category indices
    prefixes: HashMap<String, Vec<usize>>,
    /// longest prefix length in chars, bounds the probe loop
    max_prefix_chars: usize,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = Lexicon::default();
        let mut seen = BTreeSet::new();
        let mut current: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::invalid(format!("lexicon line {}: unterminated category header", lineno + 1)))?
                    .trim();
                if name.is_empty() {
                    return Err(Error::invalid(format!("lexicon line {}: empty category name", lineno + 1)));
                }
                if !seen.insert(name.to_string()) {
                    return Err(Error::invalid(format!("lexicon line {}: duplicate category {name:?}", lineno + 1)));
                }
                lexicon.names.push(name.to_string());
                current = Some(lexicon.names.len() - 1);
                continue;
            }
            let Some(cat) = current else {
                return Err(Error::invalid(format!("lexicon line {}: pattern before any [category] header", lineno + 1)));
            };
            let pattern = line.to_lowercase();
            if let Some(stem) = pattern.strip_suffix('*') {
                if stem.is_empty() {
                    return Err(Error::invalid(format!("lexicon line {}: empty prefix pattern", lineno + 1)));
                }
                if stem.contains('*') {
                    return Err(Error::invalid(format!("lexicon line {}: '*' is only allowed at the end", lineno + 1)));
                }
                lexicon.max_prefix_chars = lexicon.max_prefix_chars.max(stem.chars().count());
                push_unique(lexicon.prefixes.entry(stem.to_string()).or_default(), cat);
            } else {
                if pattern.contains('*') {
                    return Err(Error::invalid(format!("lexicon line {}: '*' is only allowed at the end", lineno + 1)));
                }
                push_unique(lexicon.literals.entry(pattern).or_default(), cat);
            }
        }
        Ok(lexicon)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Category names in file order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Indices of the categories a token belongs to, ascending and distinct.
    pub fn match_token(&self, token: &str) -> Vec<usize> {
        let lower = token.to_lowercase();
        let mut cats = BTreeSet::new();
        if let Some(indices) = self.literals.get(&lower) {
            cats.extend(indices.iter().copied());
        }
        for (consumed, (offset, c)) in lower.char_indices().enumerate() {
            if consumed >= self.max_prefix_chars {
                break;
            }
            let end = offset + c.len_utf8();
            if let Some(indices) = self.prefixes.get(&lower[..end]) {
                cats.extend(indices.iter().copied());
            }
        }
        cats.into_iter().collect()
    }

    /// Per-category match counts over a token stream.
    pub fn count_matches(&self, tokens: &[String]) -> Vec<usize> {
        let mut counts = vec![0usize; self.names.len()];
        for token in tokens {
            for cat in self.match_token(token) {
                counts[cat] += 1;
            }
        }
        counts
    }
}

fn push_unique(v: &mut Vec<usize>, x: usize) {
    if !v.contains(&x) {
        v.push(x);
    }
}
