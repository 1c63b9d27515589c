//! Multinomial Naive Bayes over fractional TF-IDF weights with Laplace smoothing.

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::FeatureMask;

#[derive(Debug, Clone)]
pub struct NbModel {
    /// `ln P(c)`; `-inf` for classes absent from the training rows.
    pub log_priors: Vec<f64>,
    /// `ln P(t|c)` indexed `[class][slot]`, where slot `s` is `features[s]`.
    pub log_likelihoods: Vec<Vec<f64>>,
    pub features: Vec<usize>,
    pub alpha: f64,
    pub mask: FeatureMask,
    slot_of: Vec<usize>,
}

const NO_SLOT: usize = usize::MAX;

pub fn nb_train(
    matrix: &DocTermMatrix,
    mask: &FeatureMask,
    rows: &[usize],
    alpha: f64,
) -> Result<NbModel> {
    check_mask(matrix, mask)?;
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    if !(alpha > 0.0) {
        return Err(Error::config(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let features = mask.indices();
    let mut slot_of = vec![NO_SLOT; matrix.n_features()];
    for (s, &j) in features.iter().enumerate() {
        slot_of[j] = s;
    }
    let n_classes = matrix.n_classes();
    let mut class_rows = vec![0usize; n_classes];
    let mut weight = vec![vec![0.0f64; features.len()]; n_classes];
    for &r in rows {
        let c = matrix.labels()[r];
        class_rows[c] += 1;
        for &(j, w) in matrix.row(r) {
            let s = slot_of[j];
            if s != NO_SLOT {
                weight[c][s] += w;
            }
        }
    }
    let n = rows.len() as f64;
    let log_priors = class_rows
        .iter()
        .map(|&nc| if nc == 0 { f64::NEG_INFINITY } else { (nc as f64 / n).ln() })
        .collect();
    let m_prime = features.len() as f64;
    let log_likelihoods = weight
        .iter()
        .map(|wc| {
            let denom = wc.iter().sum::<f64>() + alpha * m_prime;
            wc.iter().map(|&w| ((w + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(NbModel { log_priors, log_likelihoods, features, alpha, mask: mask.clone(), slot_of })
}

impl NbModel {
    /// Per-class joint log scores for a sparse row.
    pub fn scores(&self, row: &[(usize, f64)]) -> Vec<f64> {
        self.log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(&prior, ll)| {
                let mut s = prior;
                for &(j, w) in row {
                    if let Some(&slot) = self.slot_of.get(j) {
                        if slot != NO_SLOT {
                            s += w * ll[slot];
                        }
                    }
                }
                s
            })
            .collect()
    }
}

pub fn nb_predict(model: &NbModel, row: &[(usize, f64)]) -> usize {
    argmax(&model.scores(row))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_mask(matrix: &DocTermMatrix, mask: &FeatureMask) -> Result<()> {
    if mask.len() != matrix.n_features() {
        return Err(Error::MaskLength { mask: mask.len(), features: matrix.n_features() });
    }
    if mask.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(())
}
