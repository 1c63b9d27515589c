//! Information-gain ranking over binarized (present/absent) features and the
//! capped prefilter that seeds the search engines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::FeatureMask;

/// Gains at or below this are treated as zero.
pub const IG_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_IG_CAP: usize = 2500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgScores {
    /// `H(C)` in bits.
    pub class_entropy: f64,
    /// Per-feature gain in bits.
    pub gain: Vec<f64>,
    /// Feature indices by gain descending, index ascending on ties.
    pub ranking: Vec<usize>,
}

/// Entropy in bits of a count distribution, with `0 log 0 = 0`.
fn entropy_of_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

pub fn class_entropy(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyRows);
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    Ok(entropy_of_counts(&counts))
}

fn gain_from_counts(class_counts: &[usize], present: &[usize], h_c: f64) -> f64 {
    let n: usize = class_counts.iter().sum();
    let n_present: usize = present.iter().sum();
    let absent: Vec<usize> = class_counts.iter().zip(present).map(|(t, p)| t - p).collect();
    let p_present = n_present as f64 / n as f64;
    let conditional =
        p_present * entropy_of_counts(present) + (1.0 - p_present) * entropy_of_counts(&absent);
    // clamp tiny negative rounding residue
    (h_c - conditional).max(0.0)
}

/// Gain of a single feature, binarized to presence (`weight > 0`).
pub fn info_gain(matrix: &DocTermMatrix, feature: usize) -> Result<f64> {
    if feature >= matrix.n_features() {
        return Err(Error::PositionOutOfRange { position: feature, len: matrix.n_features() });
    }
    let h_c = class_entropy(matrix.labels())?;
    let mut present = vec![0; matrix.n_classes()];
    for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
        if row.binary_search_by_key(&feature, |&(j, _)| j).is_ok() {
            present[label] += 1;
        }
    }
    Ok(gain_from_counts(&matrix.class_counts(), &present, h_c))
}

/// Gains for every feature from one pass over the nonzeros.
pub fn rank_features(matrix: &DocTermMatrix) -> Result<IgScores> {
    let h_c = class_entropy(matrix.labels())?;
    let m = matrix.n_features();
    let c = matrix.n_classes();
    let mut present = vec![0usize; m * c];
    for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
        for &(j, _) in row {
            present[j * c + label] += 1;
        }
    }
    let class_counts = matrix.class_counts();
    let gain: Vec<f64> = present
        .par_chunks(c.max(1))
        .map(|p| gain_from_counts(&class_counts, p, h_c))
        .collect();
    let mut ranking: Vec<usize> = (0..m).collect();
    ranking.sort_by(|&a, &b| gain[b].total_cmp(&gain[a]).then(a.cmp(&b)));
    Ok(IgScores { class_entropy: h_c, gain, ranking })
}

/// All features with gain above [`IG_TOLERANCE`], truncated to the `cap`
/// best-ranked ones.
pub fn ig_filter(matrix: &DocTermMatrix, cap: usize) -> Result<FeatureMask> {
    let scores = rank_features(matrix)?;
    ig_filter_scored(&scores, cap)
}

pub fn ig_filter_scored(scores: &IgScores, cap: usize) -> Result<FeatureMask> {
    if cap == 0 {
        return Err(Error::config("information-gain cap must be at least 1"));
    }
    let keep: Vec<usize> = scores
        .ranking
        .iter()
        .copied()
        .take_while(|&j| scores.gain[j] > IG_TOLERANCE)
        .take(cap)
        .collect();
    if keep.is_empty() {
        return Err(Error::NoInformativeFeatures);
    }
    FeatureMask::from_indices(scores.gain.len(), keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn presence_matrix(presence: &[Vec<bool>], labels: &[usize], n_classes: usize) -> DocTermMatrix {
        let m = presence.first().map_or(0, Vec::len);
        let rows = presence
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &p)| p).map(|(j, _)| (j, 0.5)).collect())
            .collect();
        DocTermMatrix::new(m, rows, labels.to_vec(), (0..n_classes).map(|c| c.to_string()).collect())
            .unwrap()
    }

    #[test]
    fn entropy_values() {
        assert!((class_entropy(&[0, 1]).unwrap() - 1.0).abs() < 1e-12);
        assert!((class_entropy(&[0, 1, 2, 3]).unwrap() - 2.0).abs() < 1e-12);
        // -(3/4) log2(3/4) - (1/4) log2(1/4)
        assert!((class_entropy(&[0, 0, 0, 1]).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-9);
        assert!(class_entropy(&[]).is_err());
    }

    #[test]
    fn constant_and_perfect_features() {
        let labels = [0, 0, 1, 1];
        let presence = vec![
            vec![true, true, false],
            vec![true, true, false],
            vec![true, false, false],
            vec![true, false, true],
        ];
        let m = presence_matrix(&presence, &labels, 2);
        assert_eq!(info_gain(&m, 0).unwrap(), 0.0);
        assert!((info_gain(&m, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(info_gain(&m, 3).is_err());
    }

    #[test]
    fn filter_keeps_only_informative() {
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        // features 2, 5, 7 track the label; the rest are constant
        let presence: Vec<Vec<bool>> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                (0..10)
                    .map(|j| match j {
                        2 => l == 0,
                        5 => l == 1,
                        7 => l == 0 || i % 4 == 1,
                        _ => true,
                    })
                    .collect()
            })
            .collect();
        let m = presence_matrix(&presence, &labels, 2);
        let mask = ig_filter(&m, DEFAULT_IG_CAP).unwrap();
        assert_eq!(mask.indices(), [2, 5, 7]);
        assert_eq!(ig_filter(&m, 2).unwrap().indices(), [2, 5]);
    }

    #[test]
    fn all_constant_is_an_error() {
        let labels = [0, 1, 0, 1];
        let m = presence_matrix(&vec![vec![true, false]; 4], &labels, 2);
        assert!(matches!(ig_filter(&m, 10), Err(Error::NoInformativeFeatures)));
    }

    #[test]
    fn cap_truncates_to_top_of_ranking() {
        // 3000 features, each present in a label-dependent random pattern
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let labels: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let rows = labels
            .iter()
            .map(|&l| {
                (0..3000)
                    .filter(|&j| {
                        let bias = (j % 7) as f64 / 20.0;
                        rng.gen_bool(if l == 0 { 0.3 + bias } else { 0.3 })
                    })
                    .map(|j| (j, 1.0))
                    .collect()
            })
            .collect();
        let m = DocTermMatrix::new(3000, rows, labels, vec!["a".into(), "b".into()]).unwrap();
        let scores = rank_features(&m).unwrap();
        let informative = scores.gain.iter().filter(|&&g| g > IG_TOLERANCE).count();
        assert!(informative > 2500);
        let mask = ig_filter_scored(&scores, 2500).unwrap();
        assert_eq!(mask.count_ones(), 2500);
        let top: std::collections::BTreeSet<usize> = scores.ranking[..2500].iter().copied().collect();
        assert!(mask.ones_iter().all(|j| top.contains(&j)));
    }

    proptest! {
        #[test]
        fn bounds_and_row_permutation(seed in any::<u64>(), c in 2usize..5) {
            use rand::{seq::SliceRandom, Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 50;
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
            prop_assume!((0..c).all(|k| labels.contains(&k)));
            let presence: Vec<Vec<bool>> =
                (0..n).map(|_| (0..8).map(|_| rng.gen_bool(0.4)).collect()).collect();
            let m = presence_matrix(&presence, &labels, c);
            let s = rank_features(&m).unwrap();
            for &g in &s.gain {
                prop_assert!(g >= 0.0 && g <= s.class_entropy + 1e-9);
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let p2: Vec<Vec<bool>> = order.iter().map(|&i| presence[i].clone()).collect();
            let l2: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
            let s2 = rank_features(&presence_matrix(&p2, &l2, c)).unwrap();
            for (a, b) in s.gain.iter().zip(&s2.gain) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mut sorted = s.ranking.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..8).collect::<Vec<_>>());
        }

        #[test]
        fn filter_is_monotone_in_cap(seed in any::<u64>(), c1 in 1usize..20, extra in 0usize..20) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
            let presence: Vec<Vec<bool>> =
                (0..40).map(|_| (0..25).map(|_| rng.gen_bool(0.5)).collect()).collect();
            let m = presence_matrix(&presence, &labels, 2);
            if let (Ok(a), Ok(b)) = (ig_filter(&m, c1), ig_filter(&m, c1 + extra)) {
                prop_assert!(a.is_subset_of(&b));
            }
        }
    }
}
