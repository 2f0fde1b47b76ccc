//! Table and JSON-lines rendering of evaluation results.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::search::EvalEntry;
use super::stats::MetricSummary;
use crate::error::{Error, Result};

pub const TABLE_FILE: &str = "report.txt";
pub const RECORDS_FILE: &str = "report.jsonl";

/// `mean ± half-width` with two decimals.
pub fn format_fixed(mean: f64, ci99: f64) -> String {
    format!("{mean:.2} ± {ci99:.2}")
}

/// `mean ± half-width` in scientific notation, e.g. `1.05e6 ± 3.20e4`.
pub fn format_scientific(mean: f64, ci99: f64) -> String {
    format!("{mean:.2e} ± {ci99:.2e}")
}

fn cell(summary: Option<&MetricSummary>, f: fn(f64, f64) -> String) -> String {
    summary.map_or_else(|| "n/a".to_string(), |s| f(s.mean, s.ci99))
}

pub fn render_table(entries: &[EvalEntry]) -> String {
    let header = ["Model", "Accuracy (%)", "F-measure (%)", "Throughput (IPS)", "Memory (MB)"];
    let rows: Vec<[String; 5]> = entries
        .iter()
        .map(|e| {
            [
                e.algorithm.display_name().to_string(),
                format_fixed(e.accuracy.mean, e.accuracy.ci99),
                format_fixed(e.f_measure.mean, e.f_measure.ci99),
                cell(e.throughput.as_ref(), format_scientific),
                cell(e.memory_artifact_mb.as_ref(), format_fixed),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    if let Some(e) = entries.first() {
        let _ = writeln!(out, "# protocol: {}, seed: {}", e.protocol, e.seed);
    }
    let _ = writeln!(out, "{}", line(&header.map(String::from)));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    for r in &rows {
        let _ = writeln!(out, "{}", line(r));
    }
    if entries.iter().any(|e| e.zero_support_f) {
        let _ = writeln!(out, "note: some classes had no predicted or actual members in a round and scored F = 0");
    }
    if entries.iter().any(|e| e.throughput.is_some()) {
        let _ = writeln!(
            out,
            "note: throughput and memory are wall-clock/allocator measurements and vary between runs; memory is the serialized artifact size"
        );
    }
    out
}

#[derive(Serialize)]
pub struct MetricRecord<'a> {
    pub model: &'a str,
    pub metric: &'a str,
    pub mean: f64,
    pub ci99: f64,
    pub n: usize,
    pub seed: u64,
    pub protocol: String,
    pub deterministic: bool,
}

pub fn metric_records(entries: &[EvalEntry]) -> Vec<MetricRecord<'_>> {
    let mut out = Vec::new();
    for e in entries {
        let metrics: [(&str, Option<&MetricSummary>, bool); 5] = [
            ("accuracy", Some(&e.accuracy), true),
            ("f_measure", Some(&e.f_measure), true),
            ("throughput_ips", e.throughput.as_ref(), false),
            ("memory_artifact_mb", e.memory_artifact_mb.as_ref(), false),
            ("memory_resident_mb", e.memory_resident_mb.as_ref(), false),
        ];
        for (metric, summary, deterministic) in metrics {
            if let Some(s) = summary {
                out.push(MetricRecord {
                    model: e.algorithm.name(),
                    metric,
                    mean: s.mean,
                    ci99: s.ci99,
                    n: s.n,
                    seed: e.seed,
                    protocol: e.protocol.to_string(),
                    deterministic,
                });
            }
        }
    }
    out
}

pub fn render_records(entries: &[EvalEntry]) -> Result<String> {
    let mut out = String::new();
    for r in metric_records(entries) {
        out.push_str(&serde_json::to_string(&r).map_err(|e| Error::InvalidInput(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `report.txt` and `report.jsonl` into `dir`, returning both paths.
pub fn emit_report(entries: &[EvalEntry], dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("no report entries".into()));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let table = dir.join(TABLE_FILE);
    let records = dir.join(RECORDS_FILE);
    let write = |path: &Path, text: &str| -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    };
    write(&table, &render_table(entries))?;
    write(&records, &render_records(entries)?)?;
    Ok((table, records))
}
