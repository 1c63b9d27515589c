use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mbofs::synthetic::{planted_corpus, PlantedSpec};

fn mbofs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbofs")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn small_corpus(dir: &Path) -> PathBuf {
    let corpus = planted_corpus(&PlantedSpec::small(), 5).unwrap();
    let text: String = corpus.docs().iter().map(|d| format!("{}\t{}\n", d.label, d.text)).collect();
    let path = dir.join("small.tsv");
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&mbofs(&["--help"])), 0);
    assert_eq!(code(&mbofs(&["select", "--help"])), 0);
    assert_eq!(code(&mbofs(&[])), 1);
    assert_eq!(code(&mbofs(&["select", "--bogus"])), 1);
    assert_eq!(code(&mbofs(&["select", "--method", "annealing", "--corpus", "x.tsv"])), 1);
    assert_eq!(code(&mbofs(&["select", "--set", "no_such_key=1"])), 1);
    // a corpus that is not there is a pipeline failure, not a usage error
    let out = mbofs(&["select", "--corpus", "/nonexistent/corpus.tsv"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("load"));
}

#[test]
fn ingest_prints_stats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let out = mbofs(&["ingest", s(&corpus), "--stats"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[1], "120");
    assert_eq!(row[2], "3");

    let out = mbofs(&["ingest", s(&corpus)]);
    assert!(stdout(&out).starts_with("documents=120 classes=3"));
}

#[test]
fn select_evaluate_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let run = dir.path().join("run");
    let out = mbofs(&[
        "select", "--corpus", s(&corpus), "--method", "all", "--seed", "2", "--ig-cap", "40",
        "--out", s(&run), "--set", "swarm_size=6", "--set", "max-iterations=5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = stdout(&out);
    assert!(table.contains("MBO-NB") && table.contains("PSO"));
    for f in ["report.json", "mask-ig.txt", "mask-mbo.txt", "mask-pso.txt", "mask-mbo.csv", "trace-mbo.txt"] {
        assert!(run.join(f).exists(), "{f} missing");
    }

    // evaluating the stored MBO mask reproduces the reported accuracy
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    let mbo = report["methods"].as_array().unwrap().iter().find(|m| m["name"] == "mbo").unwrap();
    let out = mbofs(&["evaluate", "--corpus", s(&corpus), "--seed", "2", "--mask", s(&run.join("mask-mbo.txt"))]);
    assert_eq!(code(&out), 0);
    let line = stdout(&out);
    let acc: f64 = line.split_whitespace().next().unwrap().trim_start_matches("accuracy=").parse().unwrap();
    assert_eq!(acc, mbo["accuracy"].as_f64().unwrap());
    assert!(line.contains(&format!("m_prime={}", mbo["m_prime"])));

    let out = mbofs(&["report", s(&run)]);
    assert_eq!(stdout(&out), table);
    let csv = stdout(&mbofs(&["report", s(&run), "--style", "csv"]));
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("corpus,method,"));
    let json = stdout(&mbofs(&["report", s(&run), "--style", "json"]));
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(back["seed"], 2);
    assert_eq!(code(&mbofs(&["report", s(&run), "--style", "xml"])), 1);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "# relative paths resolve next to this file\ncorpus = small.tsv\nmethod = ig\nig_cap = 12\nout = out\n").unwrap();
    let out = mbofs(&["select", "--config", s(&cfg), "--style", "csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert!(csv.lines().any(|l| l.starts_with("small,ig,12,")), "{csv}");
    assert!(dir.path().join("out/report.json").exists());

    let out = mbofs(&["select", "--config", s(&cfg), "--ig-cap", "7", "--style", "csv"]);
    assert!(stdout(&out).lines().any(|l| l.starts_with("small,ig,7,")));
}

#[test]
fn expired_budget_exits_three_with_dash() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let run = dir.path().join("run");
    let out = mbofs(&[
        "select", "--corpus", s(&corpus), "--method", "pso", "--budget-seconds", "0.05", "--classifier", "nb",
        "--out", s(&run), "--set", "max_iterations=100000000",
    ]);
    assert_eq!(code(&out), 3);
    let table = stdout(&out);
    let start = table.find("Correctly").unwrap();
    let row: Vec<&str> = table[start..].lines().nth(3).unwrap().split_whitespace().collect();
    assert_eq!(row.last(), Some(&"-"));
    assert!(table.contains("stopped by budget"));
}

#[test]
fn halt_then_resume() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let base = ["select", "--corpus", s(&corpus), "--method", "mbo", "--seed", "4", "--ig-cap", "40"];
    let full = dir.path().join("full");
    assert_eq!(code(&mbofs(&[&base[..], &["--out", s(&full)]].concat())), 0);
    let halted = dir.path().join("halted");
    assert_eq!(code(&mbofs(&[&base[..], &["--out", s(&halted), "--halt-after", "1"]].concat())), 3);
    let cp = halted.join("checkpoint-mbo.json");
    let resumed = dir.path().join("resumed");
    assert_eq!(code(&mbofs(&[&base[..], &["--out", s(&resumed), "--resume", s(&cp)]].concat())), 0);
    assert_eq!(fs::read(full.join("mask-mbo.txt")).unwrap(), fs::read(resumed.join("mask-mbo.txt")).unwrap());

    // the checkpoint belongs to a different reduced matrix once ig_cap changes
    let out = mbofs(&[&base[..7], &["--ig-cap", "30", "--out", s(&resumed), "--resume", s(&cp)]].concat());
    assert_eq!(code(&out), 2);
}
