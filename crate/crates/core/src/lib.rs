//! Wrapper feature selection for text classification.
//!
//! The pipeline turns labelled raw text into a sparse TF-IDF matrix
//! ([`corpus`]), prefilters the vocabulary by information gain
//! ([`info_gain`]), and then searches for a compact subset of the surviving
//! features with a migrating-birds flock ([`mbo`]) whose fitness is the
//! stratified cross-validated accuracy of a multinomial Naive Bayes model
//! ([`classifiers`], [`heuristic`]). A binary particle swarm ([`pso`]) shares
//! the same fitness and serves as the comparison baseline. The [`harness`]
//! module wires everything into reproducible experiments and reports.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod heuristic;
pub mod info_gain;
pub mod mbo;
pub mod pso;
pub mod synthetic;

pub use classifiers::{Classifier, EvalReport};
pub use corpus::{Corpus, CorpusStats, DocTermMatrix, RawDocument, Vocabulary};
pub use error::{Error, Result};
pub use heuristic::{ChangeSchedule, FeatureMask, FitnessEvaluator, RngStream};
pub use mbo::{MboConfig, MboOutcome};
pub use pso::{PsoConfig, PsoOutcome};

/// Why an engine stopped searching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Three consecutive tour-best values were equal.
    Stagnation,
    MaxTours,
    MaxIterations,
    /// The wall-clock budget ran out; the best-so-far result is returned.
    Budget,
    /// An observer asked the engine to stop (used to simulate interruption).
    Halted,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Stagnation => "stagnation",
            Termination::MaxTours => "max-tours",
            Termination::MaxIterations => "max-iterations",
            Termination::Budget => "budget",
            Termination::Halted => "halted",
        }
    }
}
