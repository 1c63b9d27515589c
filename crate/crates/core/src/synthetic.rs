//! Synthetic corpora with a known set of informative terms.
//!
//! Every document is a bag of tokens. A fraction of the tokens come from a
//! small pool of "signal" terms, each tied to one class; the rest are drawn
//! uniformly from a large pool of noise terms. Because the informative
//! subset is known, these corpora give desk-scale ground truth for the
//! selection engines.

use rand::Rng;

use crate::corpus::{build_vocabulary, vectorize_tfidf, Corpus, DocTermMatrix, RawDocument, Stopwords, Vocabulary};
use crate::error::Result;
use crate::heuristic::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n_docs: usize,
    pub n_classes: usize,
    /// Vocabulary size, informative plus noise terms.
    pub n_features: usize,
    pub n_informative: usize,
    pub doc_len: (usize, usize),
    /// Probability that a token is a signal term.
    pub signal_rate: f64,
    /// Probability that a signal token belongs to the document's own class
    /// rather than a uniformly chosen one.
    pub own_class: f64,
}

impl PlantedSpec {
    /// 500 documents, 4 balanced classes, 2000 terms of which 50 informative.
    pub fn benchmark() -> Self {
        PlantedSpec {
            n_docs: 500,
            n_classes: 4,
            n_features: 2000,
            n_informative: 50,
            doc_len: (30, 60),
            signal_rate: 0.12,
            own_class: 0.5,
        }
    }

    pub fn small() -> Self {
        PlantedSpec {
            n_docs: 120,
            n_classes: 3,
            n_features: 80,
            n_informative: 9,
            doc_len: (10, 20),
            signal_rate: 0.15,
            own_class: 0.6,
        }
    }

    /// Two classes, each with one indicator term that appears only in its
    /// own documents and dominates them.
    pub fn separable() -> Self {
        PlantedSpec {
            n_docs: 40,
            n_classes: 2,
            n_features: 12,
            n_informative: 2,
            doc_len: (8, 12),
            signal_rate: 0.6,
            own_class: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub corpus: Corpus,
    pub vocab: Vocabulary,
    pub matrix: DocTermMatrix,
    /// Feature indices of the signal terms, ascending.
    pub informative: Vec<usize>,
}

pub fn signal_term(i: usize) -> String {
    format!("sig{i:04}")
}

pub fn noise_term(i: usize) -> String {
    format!("tok{i:05}")
}

pub fn planted_corpus(spec: &PlantedSpec, seed: u64) -> Result<Corpus> {
    assert!(spec.n_informative >= spec.n_classes, "need a signal term per class");
    assert!(spec.n_features > spec.n_informative, "need at least one noise term");
    let n_noise = spec.n_features - spec.n_informative;
    let root = RngStream::new(seed).child("planted", 0);
    let mut used = vec![false; spec.n_features];
    let mut docs: Vec<(usize, Vec<usize>)> = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let class = d % spec.n_classes;
        let mut rng = root.child("doc", d as u64).rng();
        let len = rng.gen_range(spec.doc_len.0..=spec.doc_len.1);
        let own: Vec<usize> = (class..spec.n_informative).step_by(spec.n_classes).collect();
        let tokens: Vec<usize> = (0..len)
            .map(|_| {
                if rng.gen_bool(spec.signal_rate) {
                    if rng.gen_bool(spec.own_class) {
                        own[rng.gen_range(0..own.len())]
                    } else {
                        rng.gen_range(0..spec.n_informative)
                    }
                } else {
                    spec.n_informative + rng.gen_range(0..n_noise)
                }
            })
            .collect();
        for &t in &tokens {
            used[t] = true;
        }
        docs.push((class, tokens));
    }
    // Terms that were never drawn are appended to a document that may carry
    // them: noise anywhere, signal terms only in their own class.
    let mut rng = root.child("coverage", 0).rng();
    for t in (0..spec.n_features).filter(|&t| !used[t]) {
        let d = if t < spec.n_informative {
            let class = t % spec.n_classes;
            class + spec.n_classes * rng.gen_range(0..spec.n_docs.div_ceil(spec.n_classes).max(1))
        } else {
            rng.gen_range(0..spec.n_docs)
        };
        let d = d.min(spec.n_docs - 1);
        docs[d].1.push(t);
    }
    let docs = docs
        .into_iter()
        .map(|(class, tokens)| RawDocument {
            label: format!("class{class}"),
            text: tokens
                .iter()
                .map(|&t| if t < spec.n_informative { signal_term(t) } else { noise_term(t - spec.n_informative) })
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    Corpus::new(docs)
}

pub fn planted(spec: &PlantedSpec, seed: u64) -> Result<Planted> {
    let corpus = planted_corpus(spec, seed)?;
    let vocab = build_vocabulary(&corpus, &Stopwords::empty())?;
    let matrix = vectorize_tfidf(&corpus, &vocab);
    let mut informative: Vec<usize> =
        (0..spec.n_informative).filter_map(|i| vocab.index_of(&signal_term(i))).collect();
    informative.sort_unstable();
    Ok(Planted { corpus, vocab, matrix, informative })
}

pub fn planted_matrix(spec: &PlantedSpec, seed: u64) -> Result<DocTermMatrix> {
    Ok(planted(spec, seed)?.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_shape() {
        let p = planted(&PlantedSpec::benchmark(), 1).unwrap();
        assert_eq!(p.matrix.n_docs(), 500);
        assert_eq!(p.matrix.n_features(), 2000);
        assert_eq!(p.matrix.n_classes(), 4);
        assert_eq!(p.informative.len(), 50);
        assert_eq!(p.matrix.class_counts(), [125; 4]);
    }

    #[test]
    fn deterministic() {
        let a = planted_corpus(&PlantedSpec::small(), 9).unwrap();
        let b = planted_corpus(&PlantedSpec::small(), 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, planted_corpus(&PlantedSpec::small(), 10).unwrap());
    }
}
