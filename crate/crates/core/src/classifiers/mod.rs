//! Internal and evaluation classifiers plus stratified cross-validation.

mod folds;
mod nb;
mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::FeatureMask;

pub use folds::{stratified_folds, FoldAssignment};
pub use nb::{argmax, nb_predict, nb_train, NbModel};
pub use tree::{dt_predict, dt_train, DtModel, Node};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_MAX_DEPTH: usize = 20;
pub const DEFAULT_MIN_SPLIT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classifier {
    NaiveBayes { alpha: f64 },
    DecisionTree { max_depth: usize, min_split: usize },
}

impl Classifier {
    pub fn naive_bayes() -> Self {
        Classifier::NaiveBayes { alpha: DEFAULT_ALPHA }
    }

    pub fn decision_tree() -> Self {
        Classifier::DecisionTree { max_depth: DEFAULT_MAX_DEPTH, min_split: DEFAULT_MIN_SPLIT }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Classifier::NaiveBayes { .. } => "nb",
            Classifier::DecisionTree { .. } => "dt",
        }
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(Classifier::naive_bayes()),
            "dt" => Ok(Classifier::decision_tree()),
            other => Err(Error::config(format!("unknown classifier {other:?}"))),
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub classifier: String,
}

impl EvalReport {
    fn from_folds(fold_accuracies: Vec<f64>, classifier: &Classifier) -> Self {
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
        EvalReport { mean_accuracy, fold_accuracies, classifier: classifier.tag().to_string() }
    }
}

/// Stratified k-fold accuracy of `classifier` restricted to the features in `mask`.
pub fn cross_val_accuracy(
    matrix: &DocTermMatrix,
    mask: &FeatureMask,
    classifier: &Classifier,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    nb::check_mask(matrix, mask)?;
    match *classifier {
        Classifier::NaiveBayes { alpha } => {
            NbCrossValidator::new(matrix, k, seed, alpha)?.evaluate(mask)
        }
        Classifier::DecisionTree { max_depth, min_split } => {
            let folds = stratified_folds(matrix.labels(), k, seed)?;
            let test_rows = folds.fold_rows();
            let accs = (0..k)
                .into_par_iter()
                .map(|f| {
                    let model = dt_train(matrix, mask, &folds.train_rows(f), max_depth, min_split)?;
                    let correct = test_rows[f]
                        .iter()
                        .filter(|&&r| dt_predict(&model, matrix.row(r)) == matrix.labels()[r])
                        .count();
                    Ok(correct as f64 / test_rows[f].len() as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(EvalReport::from_folds(accs, classifier))
        }
    }
}

/// Cross-validated multinomial NB with per-fold class/feature weight totals
/// computed once, so each mask is scored in `O(k * C * M' + test nnz * C)`.
///
/// Training totals for fold `f` are the sums of the other folds' totals taken
/// in ascending fold order.
#[derive(Debug, Clone)]
pub struct NbCrossValidator<'a> {
    matrix: &'a DocTermMatrix,
    folds: FoldAssignment,
    alpha: f64,
    test_rows: Vec<Vec<usize>>,
    /// Per fold, `[class * M + feature]` weight totals over the training rows.
    train_weight: Vec<Vec<f64>>,
    train_class_rows: Vec<Vec<usize>>,
}

impl<'a> NbCrossValidator<'a> {
    pub fn new(matrix: &'a DocTermMatrix, k: usize, seed: u64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::config(format!("smoothing alpha must be positive, got {alpha}")));
        }
        let folds = stratified_folds(matrix.labels(), k, seed)?;
        let test_rows = folds.fold_rows();
        let m = matrix.n_features();
        let c = matrix.n_classes();
        let fold_weight: Vec<Vec<f64>> = test_rows
            .par_iter()
            .map(|rows| {
                let mut w = vec![0.0; c * m];
                for &r in rows {
                    let base = matrix.labels()[r] * m;
                    for &(j, v) in matrix.row(r) {
                        w[base + j] += v;
                    }
                }
                w
            })
            .collect();
        let fold_class_rows: Vec<Vec<usize>> = test_rows
            .iter()
            .map(|rows| {
                let mut n = vec![0; c];
                for &r in rows {
                    n[matrix.labels()[r]] += 1;
                }
                n
            })
            .collect();
        let train_weight = (0..k)
            .into_par_iter()
            .map(|f| {
                let mut w = vec![0.0; c * m];
                for (g, fw) in fold_weight.iter().enumerate() {
                    if g != f {
                        for (acc, v) in w.iter_mut().zip(fw) {
                            *acc += v;
                        }
                    }
                }
                w
            })
            .collect();
        let train_class_rows = (0..k)
            .map(|f| {
                (0..c)
                    .map(|cls| {
                        fold_class_rows
                            .iter()
                            .enumerate()
                            .filter(|(g, _)| *g != f)
                            .map(|(_, n)| n[cls])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(NbCrossValidator { matrix, folds, alpha, test_rows, train_weight, train_class_rows })
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn matrix(&self) -> &DocTermMatrix {
        self.matrix
    }

    pub fn evaluate(&self, mask: &FeatureMask) -> Result<EvalReport> {
        nb::check_mask(self.matrix, mask)?;
        let features = mask.indices();
        let accs = (0..self.folds.k)
            .into_par_iter()
            .map(|f| self.fold_accuracy(f, mask, &features))
            .collect();
        Ok(EvalReport::from_folds(accs, &Classifier::NaiveBayes { alpha: self.alpha }))
    }

    fn fold_accuracy(&self, f: usize, mask: &FeatureMask, features: &[usize]) -> f64 {
        let m = self.matrix.n_features();
        let n_classes = self.matrix.n_classes();
        let weight = &self.train_weight[f];
        let class_rows = &self.train_class_rows[f];
        let n_train: usize = class_rows.iter().sum();
        let log_priors: Vec<f64> = class_rows
            .iter()
            .map(|&nc| if nc == 0 { f64::NEG_INFINITY } else { (nc as f64 / n_train as f64).ln() })
            .collect();
        let m_prime = features.len() as f64;
        let mut ll = vec![0.0; n_classes * m];
        for c in 0..n_classes {
            let base = c * m;
            let denom = features.iter().map(|&j| weight[base + j]).sum::<f64>() + self.alpha * m_prime;
            for &j in features {
                ll[base + j] = ((weight[base + j] + self.alpha) / denom).ln();
            }
        }
        let mut scores = vec![0.0; n_classes];
        let mut correct = 0usize;
        for &r in &self.test_rows[f] {
            scores.copy_from_slice(&log_priors);
            for &(j, w) in self.matrix.row(r) {
                if mask.get(j) {
                    for (c, s) in scores.iter_mut().enumerate() {
                        *s += w * ll[c * m + j];
                    }
                }
            }
            if argmax(&scores) == self.matrix.labels()[r] {
                correct += 1;
            }
        }
        correct as f64 / self.test_rows[f].len() as f64
    }
}
