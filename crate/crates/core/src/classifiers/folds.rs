use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::RngStream;

/// Stratified assignment of rows to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    /// Row indices of each fold, ascending.
    pub fn fold_rows(&self) -> Vec<Vec<usize>> {
        let mut folds = vec![Vec::new(); self.k];
        for (row, &f) in self.fold_of.iter().enumerate() {
            folds[f].push(row);
        }
        folds
    }

    /// Rows outside fold `f`, ascending.
    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&r| self.fold_of[r] != f).collect()
    }
}

/// Shuffles each class's rows with a stream derived from `(seed, class)` and
/// deals them round-robin. The dealing position carries over from one class
/// to the next so fold sizes stay balanced overall.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::config(format!("fold count must be at least 2, got {k}")));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (row, &c) in labels.iter().enumerate() {
        by_class[c].push(row);
    }
    let root = RngStream::new(seed).child("folds", k as u64);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for (c, rows) in by_class.iter_mut().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < k {
            return Err(Error::ClassTooSmall { class: c, count: rows.len(), k });
        }
        rows.shuffle(&mut root.child("class", c as u64).rng());
        for &row in rows.iter() {
            fold_of[row] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of, seed })
}
