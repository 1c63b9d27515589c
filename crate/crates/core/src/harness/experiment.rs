//! The end-to-end experiment: load, vectorize, baseline, IG prefilter,
//! search engines, evaluation, and on-disk artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifiers::cross_val_accuracy;
use crate::corpus::{
    build_vocabulary, compute_stats, load_corpus, vectorize_tfidf, Corpus, CorpusStats, DocTermMatrix, Stopwords,
    Vocabulary,
};
use crate::error::{Error, Result};
use crate::heuristic::{FeatureMask, FitnessEvaluator, RngStream};
use crate::info_gain::{ig_filter_scored, rank_features};
use crate::mbo::{mbo_run, MboObserver, MboSnapshot};
use crate::pso::{pso_run, PsoObserver, PsoSnapshot};
use crate::Termination;

use super::checkpoint::{checkpoint_load, checkpoint_save, corpus_fingerprint, Checkpoint, EngineState};
use super::config::{EvalChoice, ExperimentConfig};
use super::maskfile::{format_sidecar, write_mask};

pub const STATUS_COMPLETE: &str = "complete";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    /// `raw`, `ig`, `mbo` or `pso`.
    pub name: String,
    pub m_prime: usize,
    /// Cross-validated accuracy of the evaluating classifier, in `[0, 1]`.
    pub accuracy: f64,
    pub classifier: String,
    pub elapsed_s: f64,
    /// `complete` for raw and ig, otherwise the engine's termination reason.
    pub status: String,
    /// Engine fitness of the mask: NB accuracy under the run's fold seed.
    pub fitness: f64,
}

impl MethodRow {
    pub fn budget_expired(&self) -> bool {
        self.status == Termination::Budget.as_str()
    }

    /// Stopped before finishing, by budget or interruption.
    pub fn partial(&self) -> bool {
        self.budget_expired() || self.status == Termination::Halted.as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSection {
    pub name: String,
    #[serde(flatten)]
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub corpus: CorpusSection,
    /// Raw baseline first, then ig, mbo, pso as run.
    pub methods: Vec<MethodRow>,
    pub seed: u64,
    /// Features kept by the IG prefilter; the engines search within these.
    pub ig_selected: usize,
    pub config: BTreeMap<String, String>,
    pub footnotes: Vec<String>,
    /// Selected masks over the full vocabulary, by method name.
    #[serde(skip)]
    pub masks: BTreeMap<String, FeatureMask>,
}

impl RunReport {
    pub fn method(&self, name: &str) -> Option<&MethodRow> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn partial(&self) -> bool {
        self.methods.iter().any(MethodRow::partial)
    }
}

/// A loaded and vectorized corpus.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub name: String,
    pub corpus: Corpus,
    pub vocab: Vocabulary,
    pub matrix: DocTermMatrix,
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

/// Load and vectorize stages.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let path = config
        .corpus
        .as_deref()
        .ok_or_else(|| Error::config("no corpus given"))
        .map_err(|e| e.in_stage("load"))?;
    let corpus = load_corpus(path, config.format).map_err(|e| e.in_stage("load"))?;
    let stopwords = match &config.stopwords {
        Some(p) => Stopwords::load(p).map_err(|e| e.in_stage("load"))?,
        None => Stopwords::english(),
    };
    let vocab = build_vocabulary(&corpus, &stopwords).map_err(|e| e.in_stage("vectorize"))?;
    let matrix = vectorize_tfidf(&corpus, &vocab);
    Ok(Prepared { name: corpus_name(path), corpus, vocab, matrix })
}

/// Scores `mask` with each configured evaluation classifier and keeps the
/// best; earlier classifiers (NB first) win ties.
pub fn evaluate_mask(matrix: &DocTermMatrix, mask: &FeatureMask, config: &ExperimentConfig) -> Result<(f64, String)> {
    let mut best: Option<(f64, String)> = None;
    for clf in config.eval_classifiers() {
        let acc = cross_val_accuracy(matrix, mask, &clf, config.folds, config.seed)?.mean_accuracy;
        if best.as_ref().is_none_or(|(b, _)| acc > *b) {
            best = Some((acc, clf.tag().to_string()));
        }
    }
    Ok(best.expect("at least one evaluation classifier"))
}

fn nb_fitness(matrix: &DocTermMatrix, mask: &FeatureMask, config: &ExperimentConfig) -> Result<f64> {
    Ok(cross_val_accuracy(matrix, mask, &config.fitness_classifier(), config.folds, config.seed)?.mean_accuracy)
}

/// Saves a checkpoint at every boundary and optionally halts after a fixed
/// number of tours or iterations.
struct Checkpointer {
    path: PathBuf,
    fingerprint: String,
    rng: RngStream,
    halt_after: Option<usize>,
    error: Option<Error>,
}

impl Checkpointer {
    fn save(&mut self, checkpoint: Checkpoint) -> ControlFlow<()> {
        if let Err(e) = checkpoint_save(&self.path, &checkpoint) {
            self.error = Some(e);
            return ControlFlow::Break(());
        }
        match self.halt_after {
            Some(n) if checkpoint.progress >= n => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    }

    fn finish(self) -> Result<()> {
        self.error.map_or(Ok(()), |e| Err(e.in_stage("checkpoint")))
    }
}

impl MboObserver for Checkpointer {
    fn after_tour(&mut self, s: &MboSnapshot) -> ControlFlow<()> {
        let cp = Checkpoint::mbo(self.fingerprint.clone(), self.rng.clone(), s);
        self.save(cp)
    }
}

impl PsoObserver for Checkpointer {
    fn after_iteration(&mut self, s: &PsoSnapshot) -> ControlFlow<()> {
        let cp = Checkpoint::pso(self.fingerprint.clone(), self.rng.clone(), s);
        self.save(cp)
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e).in_stage("write"))
}

struct EngineResult {
    mask: FeatureMask,
    termination: Termination,
    elapsed_s: f64,
    trace: String,
}

/// Runs the whole pipeline and writes `report.json`, `mask-<method>.txt`,
/// `mask-<method>.csv`, `trace-<method>.txt` and `checkpoint-<method>.json`
/// under `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let prepared = prepare(config)?;
    let Prepared { name, corpus, vocab, matrix } = &prepared;
    let stats = compute_stats(corpus, vocab).map_err(|e| e.in_stage("stats"))?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e).in_stage("write"))?;

    let resume = match &config.resume {
        Some(p) => Some(checkpoint_load(p).map_err(|e| e.in_stage("resume"))?),
        None => None,
    };
    if let Some(cp) = &resume {
        let wanted = (cp.method == "mbo" && config.method.runs_mbo()) || (cp.method == "pso" && config.method.runs_pso());
        if !wanted {
            return Err(Error::CheckpointMethod { found: cp.method.clone(), expected: config.method.as_str().into() }
                .in_stage("resume"));
        }
    }

    let mut methods = Vec::new();
    let mut masks = BTreeMap::new();
    let m = matrix.n_features();

    let t = Instant::now();
    let all = FeatureMask::ones(m);
    let (accuracy, classifier) = evaluate_mask(matrix, &all, config).map_err(|e| e.in_stage("baseline"))?;
    let fitness = nb_fitness(matrix, &all, config).map_err(|e| e.in_stage("baseline"))?;
    methods.push(MethodRow {
        name: "raw".into(),
        m_prime: m,
        accuracy,
        classifier,
        elapsed_s: t.elapsed().as_secs_f64(),
        status: STATUS_COMPLETE.into(),
        fitness,
    });

    let t = Instant::now();
    let scores = rank_features(matrix).map_err(|e| e.in_stage("ig"))?;
    let ig_mask = ig_filter_scored(&scores, config.ig_cap).map_err(|e| e.in_stage("ig"))?;
    let ig_elapsed = t.elapsed().as_secs_f64();
    let columns = ig_mask.indices();
    let (accuracy, classifier) = evaluate_mask(matrix, &ig_mask, config).map_err(|e| e.in_stage("evaluate"))?;
    methods.push(MethodRow {
        name: "ig".into(),
        m_prime: ig_mask.count_ones(),
        accuracy,
        classifier,
        elapsed_s: ig_elapsed,
        status: STATUS_COMPLETE.into(),
        fitness: nb_fitness(matrix, &ig_mask, config).map_err(|e| e.in_stage("evaluate"))?,
    });
    masks.insert("ig".to_string(), ig_mask.clone());

    let reduced = matrix.select_columns(&columns);
    let fingerprint = corpus_fingerprint(&reduced);
    if let Some(cp) = &resume {
        cp.check_fingerprint(&reduced).map_err(|e| e.in_stage("resume"))?;
    }
    let evaluator = FitnessEvaluator::new(&reduced, config.fitness_classifier(), config.folds, config.seed)
        .map_err(|e| e.in_stage("ig"))?;
    let input = FeatureMask::ones(reduced.n_features());

    let mut engines: Vec<(&str, EngineResult)> = Vec::new();
    if config.method.runs_mbo() {
        let cfg = config.mbo_config();
        let snapshot = match &resume {
            Some(Checkpoint { state: EngineState::Mbo(s), .. }) => Some(s.clone()),
            _ => None,
        };
        let mut observer = Checkpointer {
            path: config.out.join("checkpoint-mbo.json"),
            fingerprint: fingerprint.clone(),
            rng: RngStream::new(cfg.seed).child("mbo", 0),
            halt_after: config.halt_after,
            error: None,
        };
        let out = mbo_run(&evaluator, &input, &cfg, snapshot, &mut observer).map_err(|e| e.in_stage("mbo"))?;
        observer.finish()?;
        let trace = out.trace.iter().map(|t| format!("{t}\n")).collect();
        engines.push(("mbo", EngineResult {
            mask: out.mask,
            termination: out.termination,
            elapsed_s: out.elapsed.as_secs_f64(),
            trace,
        }));
    }
    if config.method.runs_pso() {
        let cfg = config.pso_config();
        let snapshot = match &resume {
            Some(Checkpoint { state: EngineState::Pso(s), .. }) => Some(s.clone()),
            _ => None,
        };
        let mut observer = Checkpointer {
            path: config.out.join("checkpoint-pso.json"),
            fingerprint: fingerprint.clone(),
            rng: RngStream::new(cfg.seed).child("pso", 0),
            halt_after: config.halt_after,
            error: None,
        };
        let out = pso_run(&evaluator, &input, &cfg, snapshot, &mut observer).map_err(|e| e.in_stage("pso"))?;
        observer.finish()?;
        let trace = out.trace.iter().map(|t| format!("{t}\n")).collect();
        engines.push(("pso", EngineResult {
            mask: out.mask,
            termination: out.termination,
            elapsed_s: out.elapsed.as_secs_f64(),
            trace,
        }));
    }

    for (name, result) in engines {
        let full = result.mask.expand(&columns, m).map_err(|e| e.in_stage("evaluate"))?;
        let (accuracy, classifier) = evaluate_mask(matrix, &full, config).map_err(|e| e.in_stage("evaluate"))?;
        methods.push(MethodRow {
            name: name.into(),
            m_prime: full.count_ones(),
            accuracy,
            classifier,
            elapsed_s: result.elapsed_s,
            status: result.termination.as_str().into(),
            fitness: nb_fitness(matrix, &full, config).map_err(|e| e.in_stage("evaluate"))?,
        });
        write_file(&config.out.join(format!("trace-{name}.txt")), result.trace)?;
        masks.insert(name.to_string(), full);
    }

    for (name, mask) in &masks {
        write_mask(&config.out.join(format!("mask-{name}.txt")), mask).map_err(|e| e.in_stage("write"))?;
        write_file(&config.out.join(format!("mask-{name}.csv")), format_sidecar(mask, vocab, &scores.gain))?;
    }

    let mut footnotes = Vec::new();
    if config.classifier == EvalChoice::Best {
        footnotes.push(
            "Accuracies are the better of naive Bayes and decision tree; no multilayer perceptron is included, \
             so the raw baseline is not directly comparable to baselines that include one."
                .to_string(),
        );
    }
    if config.method.runs_pso() {
        footnotes.push(format!(
            "PSO: swarm {}, inertia {} to {}, c1 {}, c2 {}, v_max {}, {} iterations.",
            config.swarm_size, config.w_start, config.w_end, config.c1, config.c2, config.v_max, config.max_iterations
        ));
    }
    footnotes.push(format!(
        "Accuracies are mean {}-fold stratified cross-validation accuracy with fold seed {}; \
         budget {} s per engine.",
        config.folds, config.seed, config.budget_seconds
    ));

    let report = RunReport {
        corpus: CorpusSection { name: name.clone(), stats },
        methods,
        seed: config.seed,
        ig_selected: columns.len(),
        config: config.echo(),
        footnotes,
        masks,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::from(e).in_stage("write"))?;
    write_file(&config.out.join("report.json"), json + "\n")?;
    Ok(report)
}

pub fn load_report(run_dir: &Path) -> Result<RunReport> {
    let path = if run_dir.is_dir() { run_dir.join("report.json") } else { run_dir.to_path_buf() };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}
