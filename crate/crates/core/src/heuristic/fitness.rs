use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::classifiers::{cross_val_accuracy, stratified_folds, Classifier, NbCrossValidator};
use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};

use super::FeatureMask;

/// Mean stratified k-fold accuracy of `classifier` on the columns in `mask`.
/// An empty mask scores 0.0.
pub fn fitness(
    matrix: &DocTermMatrix,
    mask: &FeatureMask,
    classifier: &Classifier,
    k: usize,
    seed: u64,
) -> Result<f64> {
    if mask.len() != matrix.n_features() {
        return Err(Error::MaskLength { mask: mask.len(), features: matrix.n_features() });
    }
    if mask.count_ones() == 0 {
        return Ok(0.0);
    }
    Ok(cross_val_accuracy(matrix, mask, classifier, k, seed)?.mean_accuracy)
}

enum Backend<'a> {
    Nb(NbCrossValidator<'a>),
    Generic,
}

/// Fitness with a fixed fold seed for the whole run, memoized per mask.
///
/// Safe to share between threads; the memo only caches values the
/// uncached path would return anyway.
pub struct FitnessEvaluator<'a> {
    matrix: &'a DocTermMatrix,
    classifier: Classifier,
    k: usize,
    seed: u64,
    backend: Backend<'a>,
    memo: Option<Mutex<HashMap<Vec<u64>, f64>>>,
    computed: AtomicUsize,
    requested: AtomicUsize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(matrix: &'a DocTermMatrix, classifier: Classifier, k: usize, seed: u64) -> Result<Self> {
        let backend = match classifier {
            Classifier::NaiveBayes { alpha } => Backend::Nb(NbCrossValidator::new(matrix, k, seed, alpha)?),
            Classifier::DecisionTree { .. } => {
                stratified_folds(matrix.labels(), k, seed)?;
                Backend::Generic
            }
        };
        Ok(FitnessEvaluator {
            matrix,
            classifier,
            k,
            seed,
            backend,
            memo: Some(Mutex::new(HashMap::new())),
            computed: AtomicUsize::new(0),
            requested: AtomicUsize::new(0),
        })
    }

    pub fn with_memo(mut self, enabled: bool) -> Self {
        self.memo = enabled.then(|| Mutex::new(HashMap::new()));
        self
    }

    pub fn matrix(&self) -> &'a DocTermMatrix {
        self.matrix
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn folds(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of cross-validation runs actually performed (memo misses).
    pub fn computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn requested(&self) -> usize {
        self.requested.load(Ordering::Relaxed)
    }

    pub fn evaluate(&self, mask: &FeatureMask) -> Result<f64> {
        self.requested.fetch_add(1, Ordering::Relaxed);
        if mask.len() != self.matrix.n_features() {
            return Err(Error::MaskLength { mask: mask.len(), features: self.matrix.n_features() });
        }
        if mask.count_ones() == 0 {
            return Ok(0.0);
        }
        if let Some(memo) = &self.memo {
            if let Some(&v) = memo.lock().expect("memo poisoned").get(mask.words()) {
                return Ok(v);
            }
        }
        let value = self.compute(mask)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        if let Some(memo) = &self.memo {
            memo.lock().expect("memo poisoned").insert(mask.words().to_vec(), value);
        }
        Ok(value)
    }

    fn compute(&self, mask: &FeatureMask) -> Result<f64> {
        match &self.backend {
            Backend::Nb(cv) => Ok(cv.evaluate(mask)?.mean_accuracy),
            Backend::Generic => {
                Ok(cross_val_accuracy(self.matrix, mask, &self.classifier, self.k, self.seed)?.mean_accuracy)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn matrix() -> DocTermMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let rows = labels
            .iter()
            .map(|&l| {
                let mut row = vec![(l, 1.0)];
                row.extend((3..12).filter_map(|j| rng.gen_bool(0.4).then(|| (j, rng.gen_range(0.1..1.0)))));
                row
            })
            .collect();
        DocTermMatrix::new(12, rows, labels, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn empty_and_separable() {
        let m = matrix();
        let ev = FitnessEvaluator::new(&m, Classifier::naive_bayes(), 5, 1).unwrap();
        assert_eq!(ev.evaluate(&FeatureMask::zeros(12)).unwrap(), 0.0);
        let class_cols = FeatureMask::from_indices(12, [0, 1, 2]).unwrap();
        assert_eq!(ev.evaluate(&class_cols).unwrap(), 1.0);
        assert_eq!(fitness(&m, &FeatureMask::zeros(12), &Classifier::naive_bayes(), 5, 1).unwrap(), 0.0);
    }

    #[test]
    fn memo_is_transparent() {
        let m = matrix();
        let cached = FitnessEvaluator::new(&m, Classifier::naive_bayes(), 5, 2).unwrap();
        let plain = FitnessEvaluator::new(&m, Classifier::naive_bayes(), 5, 2).unwrap().with_memo(false);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut nonempty = 0;
        for _ in 0..40 {
            let bits: Vec<bool> = (0..12).map(|_| rng.gen_bool(0.5)).collect();
            let mask = FeatureMask::from_bools(&bits);
            nonempty += usize::from(mask.count_ones() > 0);
            let a = cached.evaluate(&mask).unwrap();
            let b = cached.evaluate(&mask).unwrap();
            let c = plain.evaluate(&mask).unwrap();
            let d = fitness(&m, &mask, &Classifier::naive_bayes(), 5, 2).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
            assert_eq!(a, d);
            assert!((0.0..=1.0).contains(&a));
        }
        assert!(cached.computed() < cached.requested());
        assert_eq!(plain.computed(), nonempty);
    }

    #[test]
    fn decision_tree_backend_matches_cv() {
        let m = matrix();
        let ev = FitnessEvaluator::new(&m, Classifier::decision_tree(), 5, 4).unwrap();
        let mask = FeatureMask::ones(12);
        let direct = cross_val_accuracy(&m, &mask, &Classifier::decision_tree(), 5, 4).unwrap();
        assert_eq!(ev.evaluate(&mask).unwrap(), direct.mean_accuracy);
    }
}
