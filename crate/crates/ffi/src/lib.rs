//! C ABI over `mbofs`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns an
//! [`MbofsStatus`]; on failure [`mbofs_last_error`] describes the problem.
//! Strings returned to the caller are freed with [`mbofs_string_free`].
//! Panics are caught at the boundary and reported as `MBOFS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use mbofs::classifiers::{cross_val_accuracy, Classifier};
use mbofs::corpus::{build_vocabulary, load_corpus, vectorize_tfidf, CorpusFormat, DocTermMatrix, Stopwords, Vocabulary};
use mbofs::harness::{run_experiment, ExperimentConfig};
use mbofs::heuristic::{ChangeSchedule, FeatureMask, FitnessEvaluator};
use mbofs::info_gain::ig_filter;
use mbofs::mbo::{mbo_run, MboConfig};
use mbofs::pso::{pso_run, PsoConfig};
use mbofs::{Error, Termination};

pub const MBOFS_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbofsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    Config = 5,
    EmptyMask = 6,
    MaskLength = 7,
    OutOfRange = 8,
    NoInformativeFeatures = 9,
    Checkpoint = 10,
    Corpus = 11,
    BufferTooSmall = 12,
    Panic = 98,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbofsTermination {
    Stagnation = 0,
    MaxTours = 1,
    MaxIterations = 2,
    Budget = 3,
    Halted = 4,
}

impl From<Termination> for MbofsTermination {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Stagnation => MbofsTermination::Stagnation,
            Termination::MaxTours => MbofsTermination::MaxTours,
            Termination::MaxIterations => MbofsTermination::MaxIterations,
            Termination::Budget => MbofsTermination::Budget,
            Termination::Halted => MbofsTermination::Halted,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum MbofsClassifier {
    NaiveBayes = 0,
    DecisionTree = 1,
}

/// Migrating-birds parameters. Start from [`mbofs_mbo_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MbofsMboParams {
    pub flock_size: usize,
    pub neighbors: usize,
    pub change_fraction: f64,
    pub budget_seconds: f64,
    pub seed: u64,
    pub folds: usize,
}

/// Binary PSO parameters. Start from [`mbofs_pso_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MbofsPsoParams {
    pub swarm_size: usize,
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub max_iterations: usize,
    pub budget_seconds: f64,
    pub seed: u64,
    pub folds: usize,
}

/// Result of a search: the selected mask over the full vocabulary.
#[repr(C)]
pub struct MbofsSelection {
    pub mask: *mut MbofsMask,
    pub fitness: f64,
    pub input_fitness: f64,
    pub termination: MbofsTermination,
}

/// A loaded, vectorized corpus.
pub struct MbofsCorpus {
    vocab: Vocabulary,
    matrix: DocTermMatrix,
}

pub struct MbofsMask(FeatureMask);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> MbofsStatus {
    match err.root() {
        Error::Io { .. } | Error::MissingPath(_) => MbofsStatus::Io,
        Error::MalformedTsv { .. } | Error::Format { .. } | Error::Json(_) => MbofsStatus::Format,
        Error::Config(_) | Error::DegenerateNeighbor { .. } => MbofsStatus::Config,
        Error::EmptyMask => MbofsStatus::EmptyMask,
        Error::MaskLength { .. } => MbofsStatus::MaskLength,
        Error::PositionOutOfRange { .. } => MbofsStatus::OutOfRange,
        Error::NoInformativeFeatures => MbofsStatus::NoInformativeFeatures,
        Error::CheckpointVersion { .. } | Error::CheckpointFingerprint | Error::CheckpointMethod { .. } => {
            MbofsStatus::Checkpoint
        }
        Error::NoDocuments | Error::EmptyVocabulary | Error::EmptyRows | Error::ClassTooSmall { .. } => {
            MbofsStatus::Corpus
        }
        Error::Stage { .. } => MbofsStatus::Internal,
    }
}

struct Failure(MbofsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MbofsStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MbofsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MbofsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            MbofsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MbofsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_path(p: *const c_char, what: &str) -> Result<Option<PathBuf>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        Ok(Some(PathBuf::from(str_arg(p, what)?)))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

#[no_mangle]
pub extern "C" fn mbofs_abi_version() -> u32 {
    MBOFS_ABI_VERSION
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn mbofs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mbofs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a corpus (`format` is "tsv" or "dirs") and builds its TF-IDF
/// matrix. `stopwords` may be NULL for the built-in English list.
///
/// # Safety
/// String arguments must be NULL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_corpus_load(
    path: *const c_char,
    format: *const c_char,
    stopwords: *const c_char,
    out: *mut *mut MbofsCorpus,
) -> MbofsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let format: CorpusFormat = str_arg(format, "format")?.parse()?;
        let stopwords = match opt_path(stopwords, "stopwords")? {
            Some(p) => Stopwords::load(&p)?,
            None => Stopwords::english(),
        };
        let corpus = load_corpus(Path::new(path), format)?;
        let vocab = build_vocabulary(&corpus, &stopwords)?;
        let matrix = vectorize_tfidf(&corpus, &vocab);
        let handle = Box::into_raw(Box::new(MbofsCorpus { vocab, matrix }));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `corpus` must be NULL or a handle from [`mbofs_corpus_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn mbofs_corpus_free(corpus: *mut MbofsCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `corpus` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_corpus_dims(
    corpus: *const MbofsCorpus,
    n_docs: *mut usize,
    n_features: *mut usize,
    n_classes: *mut usize,
) -> MbofsStatus {
    guard(|| {
        let m = &deref(corpus, "corpus")?.matrix;
        write_out(n_docs, m.n_docs(), "n_docs")?;
        write_out(n_features, m.n_features(), "n_features")?;
        write_out(n_classes, m.n_classes(), "n_classes")
    })
}

/// The vocabulary term for feature `index`, as a new string.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_corpus_term(
    corpus: *const MbofsCorpus,
    index: usize,
    out: *mut *mut c_char,
) -> MbofsStatus {
    guard(|| {
        let vocab = &deref(corpus, "corpus")?.vocab;
        let term = vocab
            .term(index)
            .ok_or(Error::PositionOutOfRange { position: index, len: vocab.len() })?;
        write_out(out, into_c_string(term.to_string()), "out")
    })
}

/// An all-zero mask of length `len`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_new(len: usize, out: *mut *mut MbofsMask) -> MbofsStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(MbofsMask(FeatureMask::zeros(len)))), "out"))
}

/// Parses a string of '0' and '1' characters.
///
/// # Safety
/// `bits` must be NULL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_from_bits(bits: *const c_char, out: *mut *mut MbofsMask) -> MbofsStatus {
    guard(|| {
        let mask = FeatureMask::parse_bits(str_arg(bits, "bits")?)?;
        write_out(out, Box::into_raw(Box::new(MbofsMask(mask))), "out")
    })
}

/// # Safety
/// `mask` must be NULL or a mask handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_free(mask: *mut MbofsMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Length of the mask, or 0 for NULL.
///
/// # Safety
/// `mask` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_len(mask: *const MbofsMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.len())
}

/// Number of selected features, or 0 for NULL.
///
/// # Safety
/// `mask` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_count(mask: *const MbofsMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.count_ones())
}

/// # Safety
/// `mask` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_set(mask: *mut MbofsMask, index: usize, value: bool) -> MbofsStatus {
    guard(|| {
        let m = mask.as_mut().ok_or_else(|| null("mask"))?;
        if index >= m.0.len() {
            return Err(Error::PositionOutOfRange { position: index, len: m.0.len() }.into());
        }
        m.0.set(index, value);
        Ok(())
    })
}

/// # Safety
/// `mask` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_get(mask: *const MbofsMask, index: usize, out: *mut bool) -> MbofsStatus {
    guard(|| {
        let m = &deref(mask, "mask")?.0;
        if index >= m.len() {
            return Err(Error::PositionOutOfRange { position: index, len: m.len() }.into());
        }
        write_out(out, m.get(index), "out")
    })
}

/// Writes one byte (0 or 1) per position into `buf`, which must hold at
/// least `mbofs_mask_len(mask)` bytes.
///
/// # Safety
/// `buf` must be writable for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mask_copy_bits(mask: *const MbofsMask, buf: *mut u8, buf_len: usize) -> MbofsStatus {
    guard(|| {
        let m = &deref(mask, "mask")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < m.len() {
            return Err(Failure(
                MbofsStatus::BufferTooSmall,
                format!("buffer holds {buf_len} bytes, mask has {}", m.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, m.len());
        for (j, b) in out.iter_mut().enumerate() {
            *b = u8::from(m.get(j));
        }
        Ok(())
    })
}

/// Features with positive information gain, capped at `cap`.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_ig_filter(corpus: *const MbofsCorpus, cap: usize, out: *mut *mut MbofsMask) -> MbofsStatus {
    guard(|| {
        let mask = ig_filter(&deref(corpus, "corpus")?.matrix, cap)?;
        write_out(out, Box::into_raw(Box::new(MbofsMask(mask))), "out")
    })
}

fn classifier(kind: MbofsClassifier) -> Classifier {
    match kind {
        MbofsClassifier::NaiveBayes => Classifier::naive_bayes(),
        MbofsClassifier::DecisionTree => Classifier::decision_tree(),
    }
}

/// Mean stratified `folds`-fold accuracy of the classifier on the masked features.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_cross_val_accuracy(
    corpus: *const MbofsCorpus,
    mask: *const MbofsMask,
    kind: MbofsClassifier,
    folds: usize,
    seed: u64,
    out: *mut f64,
) -> MbofsStatus {
    guard(|| {
        let matrix = &deref(corpus, "corpus")?.matrix;
        let mask = &deref(mask, "mask")?.0;
        let report = cross_val_accuracy(matrix, mask, &classifier(kind), folds, seed)?;
        write_out(out, report.mean_accuracy, "out")
    })
}

#[no_mangle]
pub extern "C" fn mbofs_mbo_params_default() -> MbofsMboParams {
    let c = MboConfig::default();
    MbofsMboParams {
        flock_size: c.flock_size,
        neighbors: c.neighbors,
        change_fraction: c.schedule.base_fraction,
        budget_seconds: c.budget_seconds,
        seed: c.seed,
        folds: 5,
    }
}

#[no_mangle]
pub extern "C" fn mbofs_pso_params_default() -> MbofsPsoParams {
    let c = PsoConfig::default();
    MbofsPsoParams {
        swarm_size: c.swarm_size,
        w_start: c.w_start,
        w_end: c.w_end,
        c1: c.c1,
        c2: c.c2,
        v_max: c.v_max,
        max_iterations: c.max_iterations,
        budget_seconds: c.budget_seconds,
        seed: c.seed,
        folds: 5,
    }
}

/// The engines search within `input`'s selected features; results are
/// mapped back to the full vocabulary.
fn search(
    corpus: &MbofsCorpus,
    input: &FeatureMask,
    folds: usize,
    seed: u64,
    run: impl FnOnce(&FitnessEvaluator<'_>, &FeatureMask) -> Result<(FeatureMask, f64, f64, Termination), Error>,
) -> Result<MbofsSelection, Failure> {
    let matrix = &corpus.matrix;
    if input.len() != matrix.n_features() {
        return Err(Error::MaskLength { mask: input.len(), features: matrix.n_features() }.into());
    }
    let columns = input.indices();
    let reduced = matrix.select_columns(&columns);
    let evaluator = FitnessEvaluator::new(&reduced, Classifier::naive_bayes(), folds, seed)?;
    let (mask, fitness, input_fitness, termination) = run(&evaluator, &FeatureMask::ones(columns.len()))?;
    let full = mask.expand(&columns, matrix.n_features())?;
    Ok(MbofsSelection {
        mask: Box::into_raw(Box::new(MbofsMask(full))),
        fitness,
        input_fitness,
        termination: termination.into(),
    })
}

/// Migrating-birds search seeded with `input`. `params` may be NULL for
/// defaults. On success `out->mask` is a new handle owned by the caller.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_mbo_select(
    corpus: *const MbofsCorpus,
    input: *const MbofsMask,
    params: *const MbofsMboParams,
    out: *mut MbofsSelection,
) -> MbofsStatus {
    guard(|| {
        let corpus = deref(corpus, "corpus")?;
        let input = &deref(input, "input")?.0;
        let p = params.as_ref().copied().unwrap_or_else(|| mbofs_mbo_params_default());
        let config = MboConfig {
            flock_size: p.flock_size,
            neighbors: p.neighbors,
            schedule: ChangeSchedule::new(p.change_fraction),
            budget_seconds: p.budget_seconds,
            seed: p.seed,
        };
        let sel = search(corpus, input, p.folds, p.seed, |ev, start| {
            let o = mbo_run(ev, start, &config, None, &mut ())?;
            Ok((o.mask, o.fitness, o.input_fitness, o.termination))
        })?;
        write_out(out, sel, "out")
    })
}

/// Binary PSO seeded with `input`. `params` may be NULL for defaults.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_pso_select(
    corpus: *const MbofsCorpus,
    input: *const MbofsMask,
    params: *const MbofsPsoParams,
    out: *mut MbofsSelection,
) -> MbofsStatus {
    guard(|| {
        let corpus = deref(corpus, "corpus")?;
        let input = &deref(input, "input")?.0;
        let p = params.as_ref().copied().unwrap_or_else(|| mbofs_pso_params_default());
        let config = PsoConfig {
            swarm_size: p.swarm_size,
            w_start: p.w_start,
            w_end: p.w_end,
            c1: p.c1,
            c2: p.c2,
            v_max: p.v_max,
            max_iterations: p.max_iterations,
            budget_seconds: p.budget_seconds,
            seed: p.seed,
            schedule: ChangeSchedule::default(),
        };
        let sel = search(corpus, input, p.folds, p.seed, |ev, start| {
            let o = pso_run(ev, start, &config, None, &mut ())?;
            Ok((o.mask, o.fitness, o.input_fitness, o.termination))
        })?;
        write_out(out, sel, "out")
    })
}

/// Runs a full experiment from `key = value` configuration text and returns
/// the report as JSON. Relative paths resolve against `base_dir` (may be NULL).
///
/// # Safety
/// String arguments must be NULL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mbofs_run_experiment(
    config_text: *const c_char,
    base_dir: *const c_char,
    out_json: *mut *mut c_char,
) -> MbofsStatus {
    guard(|| {
        let text = str_arg(config_text, "config_text")?;
        let base = opt_path(base_dir, "base_dir")?;
        let mut config = ExperimentConfig::default();
        config.apply_text(text, base.as_deref())?;
        let report = run_experiment(&config)?;
        let json = serde_json::to_string(&report).map_err(Error::from)?;
        write_out(out_json, into_c_string(json), "out_json")
    })
}
