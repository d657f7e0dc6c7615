//! CSV tables and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Label of the random-state ensemble used by every sampler.
pub const SAMPLING_MEASURE: &str = "hilbert-schmidt";
pub const RNG_ALGORITHM: &str = "chacha20-sha256";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Real)
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comment line, header, then rows.
    pub fn write<W: Write>(&self, comment: &str, mut out: W) -> Result<(), CliError> {
        write!(out, "# {comment}\r\n")?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Failure {
    pub index: u64,
    pub seed: u64,
    pub stream: String,
    pub detail: String,
}

/// Pass/fail counts for one named invariant.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// First failures, each with the stream needed to reproduce it.
    pub failures: Vec<Failure>,
}

/// Failures listed per check before truncation.
pub const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip,
}

impl CheckRecord {
    pub fn from_outcomes(name: &str, seed: u64, stream: &str, outcomes: &[Outcome]) -> Self {
        let mut rec = CheckRecord { name: name.into(), total: outcomes.len(), passed: 0, failed: 0, skipped: 0, failures: Vec::new() };
        for (i, o) in outcomes.iter().enumerate() {
            match o {
                Outcome::Pass => rec.passed += 1,
                Outcome::Skip => rec.skipped += 1,
                Outcome::Fail(detail) => {
                    rec.failed += 1;
                    if rec.failures.len() < MAX_LISTED_FAILURES {
                        rec.failures.push(Failure { index: i as u64, seed, stream: stream.into(), detail: detail.clone() });
                    }
                }
            }
        }
        rec
    }

    /// A single aggregate check.
    pub fn single(name: &str, seed: u64, pass: bool, detail: String) -> Self {
        let o = if pass { Outcome::Pass } else { Outcome::Fail(detail) };
        Self::from_outcomes(name, seed, "aggregate", &[o])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub library_version: String,
    pub cli_version: String,
    pub rng_algorithm: String,
    pub sampling_measure: String,
    /// Hash of everything above; identical configs share it.
    pub digest: String,
    pub wall_time_seconds: f64,
    pub checks: Vec<CheckRecord>,
    pub statistics: BTreeMap<String, f64>,
    pub vacuous: bool,
    pub exit_code: i32,
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let mut h = Sha256::new();
    for (k, v) in cfg.echo() {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.update(entcont::VERSION.as_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(RNG_ALGORITHM.as_bytes());
    h.update(SAMPLING_MEASURE.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn comment_line(cfg: &ExperimentConfig) -> String {
    format!(
        "{} manifest-digest={} entcont={} rng={} measure={}",
        cfg.experiment,
        config_digest(cfg),
        entcont::VERSION,
        RNG_ALGORITHM,
        SAMPLING_MEASURE
    )
}

pub fn csv_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join(format!("{}.csv", cfg.experiment))
}

pub fn manifest_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join(format!("{}.manifest.json", cfg.experiment))
}

pub fn write_table(cfg: &ExperimentConfig, table: &Table) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = csv_path(cfg);
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    table.write(&comment_line(cfg), file)?;
    Ok(path)
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Format(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_keeps_17_digits() {
        let x = 0.1f64 + 0.2;
        let s = format_real(x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Cell::Int(1), Cell::Empty]);
        let mut buf = Vec::new();
        t.write("note", &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# note\r\na,b\r\n1,\r\n");
    }

    #[test]
    fn records_count_outcomes() {
        let r = CheckRecord::from_outcomes("x", 5, "s", &[Outcome::Pass, Outcome::Fail("bad".into()), Outcome::Skip]);
        assert_eq!((r.total, r.passed, r.failed, r.skipped), (3, 1, 1, 1));
        assert_eq!(r.failures[0].index, 1);
    }
}
