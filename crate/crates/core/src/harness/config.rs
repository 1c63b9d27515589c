//! Experiment configuration: flat `key = value` files with `#` comments.
//! Every key can also be set from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, DEFAULT_ALPHA, DEFAULT_MAX_DEPTH, DEFAULT_MIN_SPLIT};
use crate::corpus::CorpusFormat;
use crate::error::{Error, Result};
use crate::heuristic::ChangeSchedule;
use crate::info_gain::DEFAULT_IG_CAP;
use crate::mbo::MboConfig;
use crate::pso::PsoConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ig,
    Mbo,
    Pso,
    All,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ig => "ig",
            Method::Mbo => "mbo",
            Method::Pso => "pso",
            Method::All => "all",
        }
    }

    pub fn runs_mbo(self) -> bool {
        matches!(self, Method::Mbo | Method::All)
    }

    pub fn runs_pso(self) -> bool {
        matches!(self, Method::Pso | Method::All)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" => Ok(Method::Ig),
            "mbo" => Ok(Method::Mbo),
            "pso" => Ok(Method::Pso),
            "all" => Ok(Method::All),
            other => Err(Error::config(format!("unknown method {other:?}, expected ig|mbo|pso|all"))),
        }
    }
}

/// Which classifier scores the selected masks in the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalChoice {
    Nb,
    Dt,
    /// Both, keeping the more accurate; NB wins ties.
    Best,
}

impl EvalChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalChoice::Nb => "nb",
            EvalChoice::Dt => "dt",
            EvalChoice::Best => "best",
        }
    }
}

impl FromStr for EvalChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(EvalChoice::Nb),
            "dt" => Ok(EvalChoice::Dt),
            "best" | "best-of" => Ok(EvalChoice::Best),
            other => Err(Error::config(format!("unknown classifier {other:?}, expected nb|dt|best"))),
        }
    }
}

impl fmt::Display for EvalChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub format: CorpusFormat,
    /// `None` uses the built-in English list.
    pub stopwords: Option<PathBuf>,
    pub ig_cap: usize,
    pub method: Method,
    pub classifier: EvalChoice,
    pub folds: usize,
    pub seed: u64,
    /// Per engine.
    pub budget_seconds: f64,
    pub flock_size: usize,
    pub neighbors: usize,
    pub change_fraction: f64,
    pub swarm_size: usize,
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub max_iterations: usize,
    pub alpha: f64,
    pub dt_max_depth: usize,
    pub dt_min_split: usize,
    pub out: PathBuf,
    pub resume: Option<PathBuf>,
    /// Stop each engine after this many tours or iterations, leaving its
    /// checkpoint behind. Used to exercise resumption.
    pub halt_after: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mbo = MboConfig::default();
        let pso = PsoConfig::default();
        ExperimentConfig {
            corpus: None,
            format: CorpusFormat::Tsv,
            stopwords: None,
            ig_cap: DEFAULT_IG_CAP,
            method: Method::All,
            classifier: EvalChoice::Best,
            folds: 5,
            seed: 0,
            budget_seconds: 600.0,
            flock_size: mbo.flock_size,
            neighbors: mbo.neighbors,
            change_fraction: mbo.schedule.base_fraction,
            swarm_size: pso.swarm_size,
            w_start: pso.w_start,
            w_end: pso.w_end,
            c1: pso.c1,
            c2: pso.c2,
            v_max: pso.v_max,
            max_iterations: pso.max_iterations,
            alpha: DEFAULT_ALPHA,
            dt_max_depth: DEFAULT_MAX_DEPTH,
            dt_min_split: DEFAULT_MIN_SPLIT,
            out: PathBuf::from("run"),
            resume: None,
            halt_after: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "corpus",
        "format",
        "stopwords",
        "ig_cap",
        "method",
        "classifier",
        "folds",
        "seed",
        "budget_seconds",
        "flock_size",
        "neighbors",
        "change_fraction",
        "swarm_size",
        "w_start",
        "w_end",
        "c1",
        "c2",
        "v_max",
        "max_iterations",
        "alpha",
        "dt_max_depth",
        "dt_min_split",
        "out",
        "resume",
        "halt_after",
    ];

    /// Sets one key. Dashes in the key are accepted in place of underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "corpus" => self.corpus = optional_path(value),
            "format" => self.format = value.parse()?,
            "stopwords" => self.stopwords = optional_path(value),
            "ig_cap" => self.ig_cap = parse(&key, value)?,
            "method" => self.method = value.parse()?,
            "classifier" => self.classifier = value.parse()?,
            "folds" => self.folds = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "budget_seconds" => self.budget_seconds = parse(&key, value)?,
            "flock_size" => self.flock_size = parse(&key, value)?,
            "neighbors" => self.neighbors = parse(&key, value)?,
            "change_fraction" => self.change_fraction = parse(&key, value)?,
            "swarm_size" => self.swarm_size = parse(&key, value)?,
            "w_start" => self.w_start = parse(&key, value)?,
            "w_end" => self.w_end = parse(&key, value)?,
            "c1" => self.c1 = parse(&key, value)?,
            "c2" => self.c2 = parse(&key, value)?,
            "v_max" => self.v_max = parse(&key, value)?,
            "max_iterations" => self.max_iterations = parse(&key, value)?,
            "alpha" => self.alpha = parse(&key, value)?,
            "dt_max_depth" => self.dt_max_depth = parse(&key, value)?,
            "dt_min_split" => self.dt_min_split = parse(&key, value)?,
            "out" => self.out = PathBuf::from(value),
            "resume" => self.resume = optional_path(value),
            "halt_after" => self.halt_after = if value.is_empty() { None } else { Some(parse(&key, value)?) },
            other => return Err(Error::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Relative paths are
    /// resolved against `base` when given.
    pub fn apply_text(&mut self, text: &str, base: Option<&Path>) -> Result<()> {
        let mut set_paths = false;
        let mut set_out = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!("line {}: expected key = value", n + 1)));
            };
            self.set(key, value)
                .map_err(|e| Error::config(format!("line {}: {}", n + 1, e.root())))?;
            match key.trim() {
                "out" => set_out = true,
                "corpus" | "stopwords" | "resume" => set_paths = true,
                _ => {}
            }
        }
        let Some(base) = base else { return Ok(()) };
        if set_paths {
            for path in [&mut self.corpus, &mut self.stopwords, &mut self.resume].into_iter().flatten() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        if set_out && self.out.is_relative() {
            self.out = base.join(&self.out);
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = ExperimentConfig::default();
        config.apply_text(&text, path.parent())?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if !(self.budget_seconds > 0.0) {
            return Err(Error::config("budget_seconds must be positive"));
        }
        if self.ig_cap < 1 {
            return Err(Error::config("ig_cap must be at least 1"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::config("alpha must be positive"));
        }
        self.mbo_config().validate()?;
        self.pso_config().validate()
    }

    pub fn mbo_config(&self) -> MboConfig {
        MboConfig {
            flock_size: self.flock_size,
            neighbors: self.neighbors,
            schedule: ChangeSchedule::new(self.change_fraction),
            budget_seconds: self.budget_seconds,
            seed: self.seed,
        }
    }

    pub fn pso_config(&self) -> PsoConfig {
        PsoConfig {
            swarm_size: self.swarm_size,
            w_start: self.w_start,
            w_end: self.w_end,
            c1: self.c1,
            c2: self.c2,
            v_max: self.v_max,
            max_iterations: self.max_iterations,
            budget_seconds: self.budget_seconds,
            seed: self.seed,
            schedule: ChangeSchedule::new(self.change_fraction),
        }
    }

    /// Internal fitness classifier for the engines.
    pub fn fitness_classifier(&self) -> Classifier {
        Classifier::NaiveBayes { alpha: self.alpha }
    }

    /// Classifiers tried when scoring a mask, in tie-break order.
    pub fn eval_classifiers(&self) -> Vec<Classifier> {
        let nb = Classifier::NaiveBayes { alpha: self.alpha };
        let dt = Classifier::DecisionTree { max_depth: self.dt_max_depth, min_split: self.dt_min_split };
        match self.classifier {
            EvalChoice::Nb => vec![nb],
            EvalChoice::Dt => vec![dt],
            EvalChoice::Best => vec![nb, dt],
        }
    }

    /// Every key with its current value, as written back into reports.
    /// Run-control keys (`out`, `resume`, `halt_after`) are left out so
    /// that reruns of the same experiment echo identically.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let pairs: [(&str, String); 22] = [
            ("corpus", path(&self.corpus)),
            ("format", self.format.as_str().into()),
            ("stopwords", path(&self.stopwords)),
            ("ig_cap", self.ig_cap.to_string()),
            ("method", self.method.as_str().into()),
            ("classifier", self.classifier.as_str().into()),
            ("folds", self.folds.to_string()),
            ("seed", self.seed.to_string()),
            ("budget_seconds", self.budget_seconds.to_string()),
            ("flock_size", self.flock_size.to_string()),
            ("neighbors", self.neighbors.to_string()),
            ("change_fraction", self.change_fraction.to_string()),
            ("swarm_size", self.swarm_size.to_string()),
            ("w_start", self.w_start.to_string()),
            ("w_end", self.w_end.to_string()),
            ("c1", self.c1.to_string()),
            ("c2", self.c2.to_string()),
            ("v_max", self.v_max.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("alpha", self.alpha.to_string()),
            ("dt_max_depth", self.dt_max_depth.to_string()),
            ("dt_min_split", self.dt_min_split.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = ExperimentConfig::default();
        c.apply_text(
            "# experiment\ncorpus = data/news.tsv\nmethod=mbo  # engines\n\nig_cap = 500\nclassifier = nb\nbudget-seconds = 12.5\n",
            None,
        )
        .unwrap();
        assert_eq!(c.corpus, Some(PathBuf::from("data/news.tsv")));
        assert_eq!(c.method, Method::Mbo);
        assert_eq!(c.ig_cap, 500);
        assert_eq!(c.classifier, EvalChoice::Nb);
        assert_eq!(c.budget_seconds, 12.5);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let mut c = ExperimentConfig::default();
        c.apply_text("corpus = a.tsv\nout = runs/x\n", Some(Path::new("/etc/exp"))).unwrap();
        assert_eq!(c.corpus, Some(PathBuf::from("/etc/exp/a.tsv")));
        assert_eq!(c.out, PathBuf::from("/etc/exp/runs/x"));
        let mut c = ExperimentConfig::default();
        c.apply_text("corpus = /abs.tsv\n", Some(Path::new("/etc/exp"))).unwrap();
        assert_eq!(c.corpus, Some(PathBuf::from("/abs.tsv")));
        assert_eq!(c.out, PathBuf::from("run"));
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = ExperimentConfig::default();
        assert!(c.apply_text("nonsense\n", None).is_err());
        assert!(c.apply_text("colour = blue\n", None).is_err());
        assert!(c.apply_text("folds = many\n", None).is_err());
        assert!(c.set("method", "ga").is_err());
        for (k, v) in [("folds", "1"), ("budget_seconds", "0"), ("ig_cap", "0"), ("flock_size", "4"), ("neighbors", "2")] {
            let mut c = ExperimentConfig::default();
            c.set(k, v).unwrap();
            assert!(c.validate().is_err(), "{k}={v}");
        }
    }

    #[test]
    fn every_key_is_settable_and_echoed() {
        let mut c = ExperimentConfig::default();
        let echo = c.echo();
        for (k, v) in &echo {
            c.set(k, v).unwrap();
        }
        assert_eq!(c, ExperimentConfig::default());
        for key in ExperimentConfig::KEYS {
            assert!(echo.contains_key(*key) || ["out", "resume", "halt_after"].contains(key));
        }
    }

    #[test]
    fn engine_configs_share_seed_and_budget() {
        let mut c = ExperimentConfig::default();
        c.set("seed", "42").unwrap();
        c.set("budget_seconds", "3").unwrap();
        assert_eq!(c.mbo_config().seed, 42);
        assert_eq!(c.pso_config().seed, 42);
        assert_eq!(c.pso_config().budget_seconds, 3.0);
        assert_eq!(c.eval_classifiers().len(), 2);
        c.set("classifier", "dt").unwrap();
        assert_eq!(c.eval_classifiers()[0].tag(), "dt");
    }
}
