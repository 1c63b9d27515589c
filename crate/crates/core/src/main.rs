use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mbofs::corpus::{build_vocabulary, compute_stats, load_corpus, CorpusFormat, Stopwords};
use mbofs::harness::{
    evaluate_mask, load_report, prepare, read_mask, render_report, render_reports, run_experiment, ExperimentConfig,
    ReportStyle,
};
use mbofs::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_PIPELINE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "mbofs", version, about = "Feature selection for text classification with migrating birds optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus and print its size or statistics.
    Ingest {
        path: PathBuf,
        #[arg(long, default_value = "tsv")]
        format: CorpusFormat,
        /// One token per line; defaults to a built-in English list.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Print the corpus characteristics table.
        #[arg(long)]
        stats: bool,
    },
    /// Run the selection pipeline and write a report, masks and traces.
    Select {
        #[command(flatten)]
        common: CommonArgs,
        /// ig, mbo, pso or all.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        budget_seconds: Option<f64>,
        #[arg(long)]
        ig_cap: Option<usize>,
        #[arg(long)]
        flock_size: Option<usize>,
        #[arg(long)]
        neighbors: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue an engine from its checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, hide = true)]
        halt_after: Option<usize>,
        #[arg(long, default_value = "table")]
        style: ReportStyle,
    },
    /// Cross-validate a stored mask.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        mask: PathBuf,
    },
    /// Render one or more run reports.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        #[arg(long, default_value = "table")]
        style: ReportStyle,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// nb, dt or best.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any configuration key, e.g. `--set swarm_size=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl CommonArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            c.set(k, v)?;
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides = [
            ("corpus", path(&self.corpus)),
            ("format", self.format.clone()),
            ("stopwords", path(&self.stopwords)),
            ("classifier", self.classifier.clone()),
            ("folds", self.folds.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                c.set(k, &v)?;
            }
        }
        Ok(c)
    }
}

fn exit_for(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_PIPELINE,
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Ingest { path, format, stopwords, stats } => {
            let corpus = load_corpus(&path, format)?;
            let stopwords = match stopwords {
                Some(p) => Stopwords::load(&p)?,
                None => Stopwords::english(),
            };
            let vocab = build_vocabulary(&corpus, &stopwords)?;
            let s = compute_stats(&corpus, &vocab)?;
            if stats {
                println!("features\tinstances\tclasses\tavg_words_per_instance\tavg_word_length");
                println!(
                    "{}\t{}\t{}\t{:.1}\t{:.1}",
                    s.n_features, s.n_instances, s.n_classes, s.avg_words_per_instance, s.avg_word_length
                );
            } else {
                println!("documents={} classes={} features={}", s.n_instances, s.n_classes, s.n_features);
                for (class, name) in corpus.classes().iter().enumerate() {
                    let n = corpus.docs().iter().filter(|d| &d.label == name).count();
                    println!("class {class} {name} {n}");
                }
            }
            Ok(0)
        }
        Command::Select {
            common,
            method,
            budget_seconds,
            ig_cap,
            flock_size,
            neighbors,
            out,
            resume,
            halt_after,
            style,
        } => {
            let mut c = common.config()?;
            let overrides = [
                ("method", method),
                ("budget_seconds", budget_seconds.map(|v| v.to_string())),
                ("ig_cap", ig_cap.map(|v| v.to_string())),
                ("flock_size", flock_size.map(|v| v.to_string())),
                ("neighbors", neighbors.map(|v| v.to_string())),
                ("out", out.map(|p| p.display().to_string())),
                ("resume", resume.map(|p| p.display().to_string())),
                ("halt_after", halt_after.map(|v| v.to_string())),
            ];
            for (k, v) in overrides {
                if let Some(v) = v {
                    c.set(k, &v)?;
                }
            }
            let report = run_experiment(&c)?;
            print!("{}", render_report(&report, style));
            if report.partial() {
                eprintln!("budget expired or run interrupted; partial results written to {}", c.out.display());
                return Ok(EXIT_BUDGET);
            }
            Ok(0)
        }
        Command::Evaluate { common, mask } => {
            let c = common.config()?;
            c.validate()?;
            let prepared = prepare(&c)?;
            let mask = read_mask(&mask).map_err(|e| e.in_stage("mask"))?;
            let (accuracy, classifier) =
                evaluate_mask(&prepared.matrix, &mask, &c).map_err(|e| e.in_stage("evaluate"))?;
            println!(
                "accuracy={accuracy} percent={:.1} classifier={classifier} m_prime={} folds={} seed={}",
                accuracy * 100.0,
                mask.count_ones(),
                c.folds,
                c.seed
            );
            Ok(0)
        }
        Command::Report { run_dirs, style } => {
            let reports = run_dirs.iter().map(|d| load_report(d)).collect::<Result<Vec<_>, _>>()?;
            print!("{}", render_reports(&reports, style));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
