//! Rendering run reports as text tables, JSON or CSV.
//!
//! Tables put corpora in rows and methods in columns, with an asterisk on
//! the best accuracy per corpus. A method whose budget ran out shows `-`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::experiment::{MethodRow, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportStyle::Table),
            "json" => Ok(ReportStyle::Json),
            "csv" => Ok(ReportStyle::Csv),
            other => Err(Error::Config(format!("unknown report style {other:?}, expected table|json|csv"))),
        }
    }
}

impl fmt::Display for ReportStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportStyle::Table => "table",
            ReportStyle::Json => "json",
            ReportStyle::Csv => "csv",
        })
    }
}

const METHOD_ORDER: [(&str, &str); 4] =
    [("raw", "raw data"), ("ig", "information gain"), ("mbo", "MBO-NB"), ("pso", "PSO")];

pub fn render_report(report: &RunReport, style: ReportStyle) -> String {
    render_reports(std::slice::from_ref(report), style)
}

/// Several runs render as one table with a row per corpus.
pub fn render_reports(reports: &[RunReport], style: ReportStyle) -> String {
    match style {
        ReportStyle::Table => table(reports),
        ReportStyle::Json => {
            let json = if let [one] = reports {
                serde_json::to_string_pretty(one)
            } else {
                serde_json::to_string_pretty(reports)
            };
            json.expect("reports serialize") + "\n"
        }
        ReportStyle::Csv => csv(reports),
    }
}

/// Percent with one decimal.
pub fn percent(accuracy: f64) -> String {
    format!("{:.1}", accuracy * 100.0)
}

fn aligned(rows: &[Vec<String>]) -> String {
    let n = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..n)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Rows hidden behind a dash: absent, or stopped by the budget.
fn shown(row: Option<&MethodRow>) -> Option<&MethodRow> {
    row.filter(|m| !m.budget_expired())
}

fn table(reports: &[RunReport]) -> String {
    let methods: Vec<(&str, &str)> = METHOD_ORDER
        .iter()
        .copied()
        .filter(|(key, _)| reports.iter().any(|r| r.method(key).is_some()))
        .collect();
    let header = |first: &str| -> Vec<String> {
        std::iter::once(first.to_string()).chain(methods.iter().map(|(_, h)| h.to_string())).collect()
    };

    let mut stats = vec![["data", "no of features", "no of instances", "no of classes", "avg. word count per instance", "avg. word length"]
        .map(String::from)
        .to_vec()];
    for r in reports {
        let s = &r.corpus.stats;
        stats.push(vec![
            r.corpus.name.clone(),
            s.n_features.to_string(),
            s.n_instances.to_string(),
            s.n_classes.to_string(),
            format!("{:.1}", s.avg_words_per_instance),
            format!("{:.1}", s.avg_word_length),
        ]);
    }

    let mut accuracy = vec![header("data")];
    let mut counts = vec![header("data")];
    for r in reports {
        let rows: Vec<Option<&MethodRow>> = methods.iter().map(|(key, _)| r.method(key)).collect();
        let best = rows
            .iter()
            .filter_map(|row| shown(*row).map(|m| percent(m.accuracy)))
            .filter_map(|p| p.parse::<f64>().ok())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc_row = vec![r.corpus.name.clone()];
        let mut count_row = vec![r.corpus.name.clone()];
        for row in &rows {
            match shown(*row) {
                Some(m) => {
                    let p = percent(m.accuracy);
                    let star = if p.parse::<f64>().ok() == Some(best) && rows.len() > 1 { "*" } else { "" };
                    acc_row.push(format!("{star}{p}"));
                    count_row.push(m.m_prime.to_string());
                }
                None => {
                    acc_row.push("-".into());
                    count_row.push("-".into());
                }
            }
        }
        accuracy.push(acc_row);
        counts.push(count_row);
    }

    let mut out = String::new();
    out.push_str("Corpus characteristics\n\n");
    out.push_str(&aligned(&stats));
    out.push_str("\nCorrectly classified percentage\n\n");
    out.push_str(&aligned(&accuracy));
    out.push_str("\nFeature counts\n\n");
    out.push_str(&aligned(&counts));

    let mut notes: Vec<String> = Vec::new();
    for r in reports {
        for m in r.methods.iter().filter(|m| m.name != "raw" && m.name != "ig") {
            notes.push(format!("{}: {} stopped by {} after {:.1} s", r.corpus.name, m.name, m.status, m.elapsed_s));
        }
        for m in &r.methods {
            notes.push(format!("{}: {} evaluated with {}", r.corpus.name, m.name, m.classifier));
        }
        for f in &r.footnotes {
            if !notes.contains(f) {
                notes.push(f.clone());
            }
        }
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            out.push_str(&format!("  {n}\n"));
        }
    }
    out
}

fn csv(reports: &[RunReport]) -> String {
    let mut out = String::from("corpus,method,m_prime,accuracy,classifier,elapsed_s,status,fitness\n");
    for r in reports {
        for m in &r.methods {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.corpus.name, m.name, m.m_prime, m.accuracy, m.classifier, m.elapsed_s, m.status, m.fitness
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusStats;
    use crate::harness::experiment::CorpusSection;
    use std::collections::BTreeMap;

    fn row(name: &str, m_prime: usize, accuracy: f64, status: &str) -> MethodRow {
        MethodRow {
            name: name.into(),
            m_prime,
            accuracy,
            classifier: "nb".into(),
            elapsed_s: 1.25,
            status: status.into(),
            fitness: accuracy,
        }
    }

    fn report(methods: Vec<MethodRow>) -> RunReport {
        RunReport {
            corpus: CorpusSection {
                name: "aahaber".into(),
                stats: CorpusStats {
                    n_features: 48983,
                    n_instances: 20000,
                    n_classes: 8,
                    avg_words_per_instance: 33.6,
                    avg_word_length: 6.5,
                },
            },
            methods,
            seed: 1,
            ig_selected: 2500,
            config: BTreeMap::new(),
            footnotes: vec!["note".into()],
            masks: BTreeMap::new(),
        }
    }

    fn data_line<'a>(text: &'a str, section: &str) -> Vec<&'a str> {
        let start = text.find(section).unwrap();
        text[start..].lines().nth(3).unwrap().split_whitespace().collect()
    }

    #[test]
    fn budget_expired_pso_renders_dash() {
        // Shaped like the aahaber row: PSO ran out of time.
        let r = report(vec![
            row("raw", 48983, 0.810, "complete"),
            row("ig", 2500, 0.797, "complete"),
            row("mbo", 1696, 0.828, "stagnation"),
            row("pso", 1200, 0.5, "budget"),
        ]);
        let text = render_report(&r, ReportStyle::Table);
        assert_eq!(data_line(&text, "Correctly"), ["aahaber", "81.0", "79.7", "*82.8", "-"]);
        assert_eq!(data_line(&text, "Feature counts"), ["aahaber", "48983", "2500", "1696", "-"]);
        assert!(text.contains("33.6"));
        let json = render_report(&r, ReportStyle::Json);
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.method("pso").unwrap().status, "budget");
        assert_eq!(back.method("pso").unwrap().m_prime, 1200);
    }

    #[test]
    fn single_method_and_ties() {
        let r = report(vec![row("raw", 10, 0.9130, "complete"), row("ig", 5, 0.9126, "complete")]);
        let text = render_report(&r, ReportStyle::Table);
        assert_eq!(data_line(&text, "Correctly"), ["aahaber", "*91.3", "*91.3"]);
        assert!(!text.contains("MBO-NB"));
    }

    #[test]
    fn json_to_table_round_trip() {
        let r = report(vec![row("raw", 10, 0.86349, "complete"), row("mbo", 3, 0.83, "max-tours")]);
        let back: RunReport = serde_json::from_str(&render_report(&r, ReportStyle::Json)).unwrap();
        assert_eq!(render_report(&back, ReportStyle::Table), render_report(&r, ReportStyle::Table));
        assert_eq!(percent(back.methods[0].accuracy), "86.3");
    }

    #[test]
    fn csv_rows() {
        let r = report(vec![row("raw", 10, 0.5, "complete"), row("pso", 4, 0.25, "budget")]);
        let text = render_report(&r, ReportStyle::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "aahaber,pso,4,0.25,nb,1.25,budget,0.25");
    }

    #[test]
    fn several_corpora() {
        let a = report(vec![row("raw", 10, 0.5, "complete")]);
        let mut b = a.clone();
        b.corpus.name = "webkb4".into();
        let text = render_reports(&[a, b], ReportStyle::Table);
        assert!(text.contains("aahaber") && text.contains("webkb4"));
        assert!(render_reports(&[], ReportStyle::Csv).lines().count() == 1);
    }
}
