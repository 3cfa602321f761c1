//! Single CART decision tree: greedy Gini splits over a per-node random
//! feature subset, grown depth-first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{HyperParams, LabeledDataset};

/// One node of a tree stored in a flat arena (no serialization recursion
/// limit, cheap traversal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        /// Arena index of the x ≤ threshold child.
        left: usize,
        /// Arena index of the x > threshold child.
        right: usize,
        n_samples: usize,
        /// Gini decrease of this split weighted by n_samples/n_root.
        impurity_decrease: f64,
    },
    Leaf {
        class_counts: Vec<usize>,
    },
}

/// A fitted tree; `root` indexes into `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl Tree {
    /// Predicted class index for one row: leaf majority, ties to the lowest
    /// class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = self.root;
        loop {
            match &self.nodes[at] {
                TreeNode::Split { feature_index, threshold, left, right, .. } => {
                    at = if row[*feature_index] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { class_counts } => return argmax_lowest(class_counts),
            }
        }
    }

    /// Per-feature sum of weighted impurity decreases.
    pub fn importance_sums(&self, n_features: usize) -> Vec<f64> {
        let mut sums = vec![0.0; n_features];
        for node in &self.nodes {
            if let TreeNode::Split { feature_index, impurity_decrease, .. } = node {
                sums[*feature_index] += impurity_decrease;
            }
        }
        sums
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, self.root)
    }
}

/// Index of the largest count, lowest index on ties.
pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Gini impurity 1 − Σ (c/n)².
pub fn gini(class_counts: &[usize]) -> Result<f64> {
    let n: usize = class_counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("gini of an empty node is undefined"));
    }
    Ok(gini_unchecked(class_counts, n))
}

fn gini_unchecked(class_counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Fit one tree on the given sample indices (with repetitions for bootstrap
/// samples). Deterministic in (data, sample_indices, params, seed).
pub fn fit_tree(
    data: &LabeledDataset,
    sample_indices: &[usize],
    params: &HyperParams,
    seed: u64,
) -> Tree {
    let mut grower = Grower {
        data,
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
        n_root: sample_indices.len(),
        n_classes: data.class_names.len(),
        n_features: data.feature_names.len(),
    };
    let root = grower.grow(sample_indices.to_vec(), 0);
    Tree { nodes: grower.nodes, root }
}

struct Grower<'a> {
    data: &'a LabeledDataset,
    params: &'a HyperParams,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
    n_root: usize,
    n_classes: usize,
    n_features: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let counts = self.class_counts(&indices);
        let n_node = indices.len();
        let depth_exhausted = self.params.max_depth.is_some_and(|d| depth >= d);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth_exhausted || n_node < self.params.min_samples_split {
            return self.push_leaf(counts);
        }
        match self.best_split(&indices, &counts) {
            None => self.push_leaf(counts),
            Some(split) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .iter()
                    .partition(|&&i| self.data.rows[i][split.feature] <= split.threshold);
                debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes.push(TreeNode::Split {
                    feature_index: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                    n_samples: n_node,
                    impurity_decrease: (n_node as f64 / self.n_root as f64) * split.gain.max(0.0),
                });
                self.nodes.len() - 1
            }
        }
    }

    fn push_leaf(&mut self, class_counts: Vec<usize>) -> usize {
        self.nodes.push(TreeNode::Leaf { class_counts });
        self.nodes.len() - 1
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &i in indices {
            counts[self.data.labels[i]] += 1;
        }
        counts
    }

    /// Best Gini-decrease split over a fresh uniform feature subset.
    /// Strict improvement comparison, candidates enumerated by ascending
    /// feature index then ascending threshold, so ties go to the lowest.
    /// Zero-gain splits are legal: an impure node splits whenever any sampled
    /// feature varies, which lets depth-2 trees solve XOR-style data.
    fn best_split(&mut self, indices: &[usize], parent_counts: &[usize]) -> Option<BestSplit> {
        let m = self.params.max_features.resolve(self.n_features);
        let mut subset = rand::seq::index::sample(&mut self.rng, self.n_features, m).into_vec();
        subset.sort_unstable();

        let n_node = indices.len();
        let parent_gini = gini_unchecked(parent_counts, n_node);
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n_node);
        for feature in subset {
            pairs.clear();
            pairs.extend(indices.iter().map(|&i| (self.data.rows[i][feature], self.data.labels[i])));
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

            let mut left = vec![0usize; self.n_classes];
            for p in 1..n_node {
                left[pairs[p - 1].1] += 1;
                if pairs[p].0 == pairs[p - 1].0 {
                    continue;
                }
                let threshold = midpoint(pairs[p - 1].0, pairs[p].0);
                let right: Vec<usize> =
                    parent_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let wl = p as f64 / n_node as f64;
                let wr = 1.0 - wl;
                let gain = parent_gini
                    - wl * gini_unchecked(&left, p)
                    - wr * gini_unchecked(&right, n_node - p);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit { feature, threshold, gain });
                }
            }
        }
        best
    }
}

/// Midpoint of two distinct sorted values; if rounding lands on the upper
/// value the lower one is used, so `x ≤ t` always separates them.
fn midpoint(lower: f64, upper: f64) -> f64 {
    let mid = lower + (upper - lower) / 2.0;
    if mid >= upper {
        lower
    } else {
        mid
    }
}
