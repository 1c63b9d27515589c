use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("path does not exist: {}", .0.display())]
    MissingPath(PathBuf),
    #[error("malformed TSV line {line}: {reason}")]
    MalformedTsv { line: usize, reason: &'static str },
    #[error("zero documents")]
    NoDocuments,
    #[error("vocabulary is empty after tokenization and stopword removal")]
    EmptyVocabulary,
    #[error("feature mask selects no features")]
    EmptyMask,
    #[error("row subset is empty")]
    EmptyRows,
    #[error("mask length {mask} does not match feature count {features}")]
    MaskLength { mask: usize, features: usize },
    #[error("position {position} out of range for mask of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("class {class} has {count} rows, fewer than {k} folds")]
    ClassTooSmall { class: usize, count: usize, k: usize },
    #[error("no informative features")]
    NoInformativeFeatures,
    #[error("degenerate neighbor: every draw of {change} flips produced an empty mask")]
    DegenerateNeighbor { change: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint format version {found}, expected {expected}")]
    CheckpointVersion { found: u32, expected: u32 },
    #[error("checkpoint from a different corpus")]
    CheckpointFingerprint,
    #[error("checkpoint is for method {found}, expected {expected}")]
    CheckpointMethod { found: String, expected: String },
    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
