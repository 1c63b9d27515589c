//! Corpus ingestion, tokenization and TF-IDF vectorization.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A small English stopword list used when no stopword file is given.
const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Tsv,
    /// One subdirectory per class, one file per document.
    Dirs,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "dirs" | "class-dirs" => Ok(CorpusFormat::Dirs),
            other => Err(Error::config(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl CorpusFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::Dirs => "dirs",
        }
    }
}

/// Documents in ingestion order plus the distinct labels in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<RawDocument>,
    classes: Vec<String>,
}

impl Corpus {
    pub fn new(docs: Vec<RawDocument>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::NoDocuments);
        }
        let mut classes: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        for doc in &docs {
            if doc.label.is_empty() {
                return Err(Error::Format { what: "document", reason: "empty label".into() });
            }
            if seen.insert(doc.label.as_str()) {
                classes.push(doc.label.clone());
            }
        }
        Ok(Corpus { docs, classes })
    }

    pub fn docs(&self) -> &[RawDocument] {
        &self.docs
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    fn class_index(&self) -> HashMap<&str, usize> {
        self.classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect()
    }
}

/// Loads a corpus in either supported layout.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    if !path.exists() {
        return Err(Error::MissingPath(path.to_path_buf()));
    }
    match format {
        CorpusFormat::Tsv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_tsv(&text)
        }
        CorpusFormat::Dirs => load_class_dirs(path),
    }
}

pub fn parse_tsv(text: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let (label, body) = line
            .split_once('\t')
            .ok_or(Error::MalformedTsv { line: i + 1, reason: "no tab separator" })?;
        if label.is_empty() {
            return Err(Error::MalformedTsv { line: i + 1, reason: "empty label" });
        }
        docs.push(RawDocument { label: label.to_string(), text: body.to_string() });
    }
    Corpus::new(docs)
}

/// Class directories and the files inside them are visited in lexicographic order.
fn load_class_dirs(root: &Path) -> Result<Corpus> {
    let mut class_dirs = sorted_entries(root)?;
    class_dirs.retain(|p| p.is_dir());
    let mut docs = Vec::new();
    for dir in class_dirs {
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for file in sorted_entries(&dir)? {
            if !file.is_file() {
                continue;
            }
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            docs.push(RawDocument { label: label.clone(), text });
        }
    }
    Corpus::new(docs)
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

/// Lowercased stopword set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn english() -> Self {
        Stopwords(DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect())
    }

    pub fn empty() -> Self {
        Stopwords(HashSet::new())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// One token per line, UTF-8.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_words(text.lines()))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercases, splits on runs of non-alphanumeric characters, drops tokens
/// shorter than two characters and stopwords.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    stopwords: Stopwords,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Number of documents containing each term.
    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }
}

/// Assigns indices in first-appearance order.
pub fn build_vocabulary(corpus: &Corpus, stopwords: &Stopwords) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::NoDocuments);
    }
    let mut terms = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut df = Vec::new();
    let mut seen_in_doc = HashSet::new();
    for doc in corpus.docs() {
        seen_in_doc.clear();
        for token in tokenize(&doc.text, stopwords) {
            let id = match index.get(&token) {
                Some(&id) => id,
                None => {
                    let id = terms.len();
                    terms.push(token.clone());
                    index.insert(token, id);
                    df.push(0);
                    id
                }
            };
            if seen_in_doc.insert(id) {
                df[id] += 1;
            }
        }
    }
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary { terms, index, df, stopwords: stopwords.clone() })
}

/// Sparse row: `(feature index, weight)` pairs sorted by feature index, every weight > 0.
pub type SparseRow = Vec<(usize, f64)>;

/// N x M sparse matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    n_features: usize,
    rows: Vec<SparseRow>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl DocTermMatrix {
    /// Builds a matrix, validating indices, weights and labels.
    pub fn new(
        n_features: usize,
        rows: Vec<SparseRow>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Format {
                what: "matrix",
                reason: format!("{} rows but {} labels", rows.len(), labels.len()),
            });
        }
        for row in &rows {
            let mut prev = None;
            for &(j, w) in row {
                if j >= n_features || !(w > 0.0) || !w.is_finite() {
                    return Err(Error::Format {
                        what: "matrix",
                        reason: format!("invalid entry ({j}, {w})"),
                    });
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(Error::Format {
                        what: "matrix",
                        reason: "row indices not strictly increasing".into(),
                    });
                }
                prev = Some(j);
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Format { what: "matrix", reason: format!("label {bad} out of range") });
        }
        Ok(DocTermMatrix { n_features, rows, labels, class_names })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Keeps only the listed columns, renumbered `0..columns.len()` in the given order.
    /// Weights are not renormalized.
    pub fn select_columns(&self, columns: &[usize]) -> DocTermMatrix {
        let mut remap = vec![usize::MAX; self.n_features];
        for (new, &old) in columns.iter().enumerate() {
            remap[old] = new;
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r: SparseRow = row
                    .iter()
                    .filter(|(j, _)| remap[*j] != usize::MAX)
                    .map(|&(j, w)| (remap[j], w))
                    .collect();
                r.sort_by_key(|&(j, _)| j);
                r
            })
            .collect();
        DocTermMatrix {
            n_features: columns.len(),
            rows,
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw term counts times smoothed idf, each row L2-normalized.
pub fn vectorize_tfidf(corpus: &Corpus, vocab: &Vocabulary) -> DocTermMatrix {
    let n = corpus.len();
    let idf: Vec<f64> = vocab.df().iter().map(|&df| smoothed_idf(n, df)).collect();
    let class_of = corpus.class_index();
    let rows: Vec<SparseRow> = corpus
        .docs()
        .par_iter()
        .map(|doc| {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for token in tokenize(&doc.text, vocab.stopwords()) {
                if let Some(id) = vocab.index_of(&token) {
                    *counts.entry(id).or_insert(0) += 1;
                }
            }
            let mut row: SparseRow =
                counts.into_iter().map(|(j, tf)| (j, tf as f64 * idf[j])).collect();
            row.sort_by_key(|&(j, _)| j);
            let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in &mut row {
                    *w /= norm;
                }
            }
            row
        })
        .collect();
    let labels = corpus.docs().iter().map(|d| class_of[d.label.as_str()]).collect();
    DocTermMatrix {
        n_features: vocab.len(),
        rows,
        labels,
        class_names: corpus.classes().to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_features: usize,
    pub n_instances: usize,
    pub n_classes: usize,
    pub avg_words_per_instance: f64,
    pub avg_word_length: f64,
}

/// Word counts and lengths are measured on tokens after stopword removal.
pub fn compute_stats(corpus: &Corpus, vocab: &Vocabulary) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::NoDocuments);
    }
    let mut tokens = 0usize;
    let mut chars = 0usize;
    for doc in corpus.docs() {
        for t in tokenize(&doc.text, vocab.stopwords()) {
            tokens += 1;
            chars += t.chars().count();
        }
    }
    let n = corpus.len();
    Ok(CorpusStats {
        n_features: vocab.len(),
        n_instances: n,
        n_classes: corpus.classes().len(),
        avg_words_per_instance: tokens as f64 / n as f64,
        avg_word_length: if tokens == 0 { 0.0 } else { chars as f64 / tokens as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(docs: &[(&str, &str)]) -> Corpus {
        Corpus::new(
            docs.iter()
                .map(|(l, t)| RawDocument { label: l.to_string(), text: t.to_string() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn tokenizer_rules() {
        let sw = Stopwords::from_words(["the"]);
        assert_eq!(tokenize("The cat sat.", &sw), vec!["cat", "sat"]);
        assert!(tokenize("", &sw).is_empty());
        assert!(tokenize("a I x", &Stopwords::empty()).is_empty());
        assert_eq!(tokenize("Çok-güzel_ŞEY", &Stopwords::empty()), vec!["çok", "güzel", "şey"]);
    }

    #[test]
    fn tsv_parsing() {
        let c = parse_tsv("a\tone two\nb\tthree\na\tfour\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.classes(), ["a", "b"]);
        assert!(matches!(parse_tsv(""), Err(Error::NoDocuments)));
        assert!(matches!(
            parse_tsv("a\tok\nbroken line\n"),
            Err(Error::MalformedTsv { line: 2, .. })
        ));
    }

    #[test]
    fn missing_path_is_an_error() {
        let err = load_corpus(Path::new("/definitely/not/here.tsv"), CorpusFormat::Tsv);
        assert!(matches!(err, Err(Error::MissingPath(_))));
    }

    #[test]
    fn vocabulary_first_appearance_and_df() {
        let c = corpus(&[("x", "cat cat dog"), ("y", "dog")]);
        let v = build_vocabulary(&c, &Stopwords::empty()).unwrap();
        assert_eq!(v.terms(), ["cat", "dog"]);
        assert_eq!(v.df(), [1, 2]);

        let single = build_vocabulary(&corpus(&[("x", "cat")]), &Stopwords::empty()).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.df(), [1]);

        let all_stop = corpus(&[("x", "the and"), ("y", "of the")]);
        assert!(matches!(
            build_vocabulary(&all_stop, &Stopwords::english()),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn idf_values() {
        assert_eq!(smoothed_idf(5, 5), 1.0);
        assert!((smoothed_idf(2, 1) - 1.405_465_108_108_164_4).abs() < 1e-12);
    }

    #[test]
    fn tfidf_rows_are_unit_or_empty() {
        let c = corpus(&[("x", "cat"), ("y", "dog dog cat bird"), ("x", "")]);
        let v = build_vocabulary(&c, &Stopwords::empty()).unwrap();
        let m = vectorize_tfidf(&c, &v);
        assert_eq!(m.row(0), [(0, 1.0)]);
        assert!(m.row(2).is_empty());
        let norm: f64 = m.row(1).iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        assert_eq!(m.labels(), [0, 1, 0]);
        // dog: tf 2, df 1, N 3 -> 2 * (ln(4/2) + 1); cat: tf 1, df 2 -> ln(4/3) + 1
        let dog = 2.0 * smoothed_idf(3, 1);
        let cat = smoothed_idf(3, 2);
        let bird = smoothed_idf(3, 1);
        let norm = (dog * dog + cat * cat + bird * bird).sqrt();
        let row: HashMap<usize, f64> = m.row(1).iter().copied().collect();
        assert!((row[&v.index_of("dog").unwrap()] - dog / norm).abs() < 1e-12);
        assert!((row[&v.index_of("cat").unwrap()] - cat / norm).abs() < 1e-12);
    }

    #[test]
    fn stats_are_token_weighted() {
        let c = corpus(&[("x", "cat door"), ("y", "one two three four five six")]);
        let v = build_vocabulary(&c, &Stopwords::empty()).unwrap();
        let s = compute_stats(&c, &v).unwrap();
        assert_eq!(s.avg_words_per_instance, 4.0);
        let single = corpus(&[("x", "cat door")]);
        let v1 = build_vocabulary(&single, &Stopwords::empty()).unwrap();
        assert_eq!(compute_stats(&single, &v1).unwrap().avg_word_length, 3.5);
    }

    #[test]
    fn select_columns_renumbers() {
        let m = DocTermMatrix::new(
            4,
            vec![vec![(0, 0.5), (2, 0.5), (3, 1.0)], vec![(1, 1.0)]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let r = m.select_columns(&[2, 3]);
        assert_eq!(r.n_features(), 2);
        assert_eq!(r.row(0), [(0, 0.5), (1, 1.0)]);
        assert!(r.row(1).is_empty());
    }
}
