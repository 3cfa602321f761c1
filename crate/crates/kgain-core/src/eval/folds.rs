//! Seeded k-fold splitters. Fold membership is a pure function of
//! (n, k, labels, seed, stratified); train and test indices come back sorted.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Split `0..n` into k (train, test) pairs.
///
/// Unstratified: one shuffle, then contiguous chunks whose sizes differ by at
/// most one. Stratified: each class is shuffled and dealt floor(m/k) per fold,
/// with the m mod k remainders placed in a window that rotates from class to
/// class so fold totals also differ by at most one.
pub fn kfold_splits(
    n: usize,
    k: usize,
    labels: &[usize],
    seed: u64,
    stratified: bool,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("cannot split {n} rows into {k} folds")));
    }
    if stratified && labels.len() != n {
        return Err(Error::invalid(format!(
            "stratified split needs {n} labels, got {}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    if stratified {
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut window_start = 0usize;
        for class in 0..n_classes {
            let mut members: Vec<usize> =
                (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            let base = members.len() / k;
            let rem = members.len() % k;
            let mut cursor = 0;
            for (f, fold) in folds.iter_mut().enumerate() {
                let extra = usize::from((f + k - window_start) % k < rem);
                fold.extend_from_slice(&members[cursor..cursor + base + extra]);
                cursor += base + extra;
            }
            window_start = (window_start + rem) % k;
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let base = n / k;
        let rem = n % k;
        let mut cursor = 0;
        for (f, fold) in folds.iter_mut().enumerate() {
            let size = base + usize::from(f < rem);
            fold.extend_from_slice(&order[cursor..cursor + size]);
            cursor += size;
        }
    }
    let mut splits = Vec::with_capacity(k);
    for fold in folds {
        let mut test = fold;
        test.sort_unstable();
        let mut in_test = vec![false; n];
        for &i in &test {
            in_test[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        splits.push((train, test));
    }
    Ok(splits)
}
