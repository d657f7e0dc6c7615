//! The experiments behind the command-line runs.

pub mod bs_remainder;
pub mod cloud;
pub mod heatmap;
pub mod variational;
pub mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{self, CheckRecord, RunManifest, Table};
use crate::{exit, CliError};

/// Everything an experiment produces before it is written out.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub table: Table,
    pub checks: Vec<CheckRecord>,
    pub statistics: BTreeMap<String, f64>,
    /// The experiment exists to find a witness and found none.
    pub witness_missing: bool,
    pub vacuous: bool,
}

impl ExperimentOutput {
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.failed > 0) {
            exit::INVARIANT_FAILURE
        } else if self.witness_missing {
            exit::WITNESS_NOT_FOUND
        } else {
            exit::SUCCESS
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub manifest: RunManifest,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Computes an experiment without touching the filesystem.
pub fn compute(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    match cfg.experiment {
        Experiment::DivergenceCloud => cloud::run(cfg),
        Experiment::DivergenceHeatmap => heatmap::run(cfg),
        Experiment::BsRemainder => bs_remainder::run(cfg),
        Experiment::VariationalViolation => variational::run(cfg),
        Experiment::VerifySuite => verify::run(cfg),
    }
}

/// Runs an experiment and writes its CSV and manifest into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult, CliError> {
    let start = Instant::now();
    let out = compute(cfg)?;
    let csv_path = output::write_table(cfg, &out.table)?;
    let manifest = RunManifest {
        experiment: cfg.experiment.name().into(),
        config: cfg.echo(),
        library_version: entcont::VERSION.into(),
        cli_version: env!("CARGO_PKG_VERSION").into(),
        rng_algorithm: output::RNG_ALGORITHM.into(),
        sampling_measure: output::SAMPLING_MEASURE.into(),
        digest: output::config_digest(cfg),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        exit_code: out.exit_code(),
        checks: out.checks,
        statistics: out.statistics,
        vacuous: out.vacuous,
    };
    let manifest_path = output::manifest_path(cfg);
    output::write_manifest(&manifest_path, &manifest)?;
    Ok(RunResult { manifest, csv_path, manifest_path })
}

/// Order-preserving parallel map over sample indices.
pub(crate) fn par_samples<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

pub(crate) fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Fraction of `true` among `flags`, `None` when empty.
pub(crate) fn fraction(flags: impl Iterator<Item = bool>) -> Option<(f64, usize)> {
    let (mut yes, mut n) = (0usize, 0usize);
    for f in flags {
        n += 1;
        yes += f as usize;
    }
    (n > 0).then(|| (yes as f64 / n as f64, n))
}
