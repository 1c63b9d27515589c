//! CART-style decision tree with Gini impurity on sparse rows.

use crate::corpus::DocTermMatrix;
use crate::error::Result;
use crate::heuristic::FeatureMask;

use super::nb::check_mask;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct DtModel {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub min_split: usize,
}

impl DtModel {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Builder<'a> {
    matrix: &'a DocTermMatrix,
    /// Per selected feature: `(row, value)` for training rows with a nonzero value.
    columns: Vec<(usize, Vec<(usize, f64)>)>,
    in_node: Vec<bool>,
    n_classes: usize,
    max_depth: usize,
    min_split: usize,
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

impl Builder<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.matrix.labels()[r]] += 1;
        }
        counts
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.class_counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < self.min_split {
            return id;
        }
        let Some(split) = self.best_split(&rows, &counts) else {
            return id;
        };
        let value = |r: usize| -> f64 {
            self.matrix
                .row(r)
                .binary_search_by_key(&split.feature, |&(j, _)| j)
                .map_or(0.0, |i| self.matrix.row(r)[i].1)
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| value(r) <= split.threshold);
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }

    /// Lowest weighted Gini over all selected features and midpoint thresholds.
    /// Ties keep the earlier feature, then the smaller threshold.
    fn best_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<Split> {
        for &r in rows {
            self.in_node[r] = true;
        }
        let n = rows.len();
        let mut best: Option<Split> = None;
        let mut values: Vec<(f64, usize)> = Vec::new();
        for (feature, column) in &self.columns {
            values.clear();
            values.extend(
                column
                    .iter()
                    .filter(|(r, _)| self.in_node[*r])
                    .map(|&(r, v)| (v, self.matrix.labels()[r])),
            );
            let zeros = n - values.len();
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            // Left side starts with the implicit zeros.
            let mut left = counts.to_vec();
            for &(_, c) in &values {
                left[c] -= 1;
            }
            let mut left_n = zeros;
            let mut prev = if zeros > 0 { Some(0.0) } else { None };
            let mut i = 0;
            while i < values.len() {
                let v = values[i].0;
                if let Some(p) = prev {
                    if left_n > 0 && left_n < n {
                        let right: Vec<usize> =
                            counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                        let impurity = (left_n as f64 * gini(&left, left_n)
                            + (n - left_n) as f64 * gini(&right, n - left_n))
                            / n as f64;
                        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                            best = Some(Split { feature: *feature, threshold: (p + v) / 2.0, impurity });
                        }
                    }
                }
                while i < values.len() && values[i].0 == v {
                    left[values[i].1] += 1;
                    left_n += 1;
                    i += 1;
                }
                prev = Some(v);
            }
        }
        for &r in rows {
            self.in_node[r] = false;
        }
        best
    }
}

/// Greedy binary splits minimizing weighted Gini impurity. Growth stops at
/// pure nodes, at `max_depth`, or below `min_split` rows.
pub fn dt_train(
    matrix: &DocTermMatrix,
    mask: &FeatureMask,
    rows: &[usize],
    max_depth: usize,
    min_split: usize,
) -> Result<DtModel> {
    check_mask(matrix, mask)?;
    let mut slot_of = vec![usize::MAX; matrix.n_features()];
    let mut columns: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
    for j in mask.ones_iter() {
        slot_of[j] = columns.len();
        columns.push((j, Vec::new()));
    }
    for &r in rows {
        for &(j, w) in matrix.row(r) {
            if slot_of[j] != usize::MAX {
                columns[slot_of[j]].1.push((r, w));
            }
        }
    }
    let mut builder = Builder {
        matrix,
        columns,
        in_node: vec![false; matrix.n_docs()],
        n_classes: matrix.n_classes(),
        max_depth,
        min_split,
        nodes: Vec::new(),
    };
    builder.build(rows.to_vec(), 0);
    Ok(DtModel { nodes: builder.nodes, max_depth, min_split })
}

/// Descends left when the row's value (zero if absent) is at most the threshold.
pub fn dt_predict(model: &DtModel, row: &[(usize, f64)]) -> usize {
    let mut i = 0;
    loop {
        match model.nodes[i] {
            Node::Leaf { class } => return class,
            Node::Split { feature, threshold, left, right } => {
                let v = row
                    .binary_search_by_key(&feature, |&(j, _)| j)
                    .map_or(0.0, |k| row[k].1);
                i = if v <= threshold { left } else { right };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn one_dim() -> DocTermMatrix {
        // class A at 0.0 (absent), class B at 1.0
        DocTermMatrix::new(
            1,
            vec![vec![], vec![], vec![(0, 1.0)], vec![(0, 1.0)]],
            vec![0, 0, 1, 1],
            vec!["A".into(), "B".into()],
        )
        .unwrap()
    }

    #[test]
    fn single_split_at_midpoint() {
        let m = one_dim();
        let model = dt_train(&m, &FeatureMask::ones(1), &[0, 1, 2, 3], 20, 2).unwrap();
        assert_eq!(
            model.nodes[0],
            Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 }
        );
        for r in 0..4 {
            assert_eq!(dt_predict(&model, m.row(r)), m.labels()[r]);
        }
        assert_eq!(dt_predict(&model, &[(0, 0.7)]), 1);
        assert_eq!(dt_predict(&model, &[]), 0);
    }

    #[test]
    fn stopping_rules() {
        let m = one_dim();
        let pure = dt_train(&m, &FeatureMask::ones(1), &[2, 3], 20, 2).unwrap();
        assert_eq!(pure.nodes, [Node::Leaf { class: 1 }]);
        let stump = dt_train(&m, &FeatureMask::ones(1), &[0, 1, 2], 0, 2).unwrap();
        assert_eq!(stump.nodes, [Node::Leaf { class: 0 }]);
        assert_eq!(dt_predict(&stump, &[(0, 9.0)]), 0);
        let small = dt_train(&m, &FeatureMask::ones(1), &[0, 2], 20, 3).unwrap();
        assert_eq!(small.nodes.len(), 1);
    }

    #[test]
    fn splits_only_on_selected_features() {
        let m = DocTermMatrix::new(
            2,
            vec![vec![(1, 1.0)], vec![(1, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]],
            vec![0, 0, 1, 1],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let mask = FeatureMask::from_bools(&[false, true]);
        let model = dt_train(&m, &mask, &[0, 1, 2, 3], 5, 2).unwrap();
        for node in &model.nodes {
            if let Node::Split { feature, .. } = node {
                assert_eq!(*feature, 1);
            }
        }
    }

    fn random_matrix(seed: u64) -> DocTermMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 60;
        let rows = (0..n)
            .map(|_| {
                (0..8)
                    .filter_map(|j| rng.gen_bool(0.4).then(|| (j, (rng.gen_range(1..5) as f64) / 4.0)))
                    .collect()
            })
            .collect();
        let labels = (0..n).map(|_| rng.gen_range(0..3)).collect();
        DocTermMatrix::new(8, rows, labels, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn train_accuracy(m: &DocTermMatrix, model: &DtModel) -> usize {
        (0..m.n_docs()).filter(|&r| dt_predict(model, m.row(r)) == m.labels()[r]).count()
    }

    proptest! {
        #[test]
        fn deeper_never_fits_worse(seed in any::<u64>()) {
            let m = random_matrix(seed);
            let rows: Vec<usize> = (0..m.n_docs()).collect();
            let mask = FeatureMask::ones(8);
            let mut prev = 0;
            for depth in 0..8 {
                let model = dt_train(&m, &mask, &rows, depth, 2).unwrap();
                prop_assert!(model.depth() <= depth);
                let acc = train_accuracy(&m, &model);
                prop_assert!(acc >= prev);
                prev = acc;
            }
        }
    }
}
