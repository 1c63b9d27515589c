//! Experiment orchestration, checkpoints, mask files and reports.

pub mod checkpoint;
pub mod config;
pub mod experiment;
pub mod maskfile;
pub mod report;

pub use checkpoint::{checkpoint_load, checkpoint_save, corpus_fingerprint, Checkpoint, CHECKPOINT_VERSION};
pub use config::{EvalChoice, ExperimentConfig, Method};
pub use experiment::{evaluate_mask, load_report, prepare, run_experiment, MethodRow, RunReport};
pub use maskfile::{read_mask, write_mask};
pub use report::{render_report, render_reports, ReportStyle};
