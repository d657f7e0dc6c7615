//! `ours − AE` on a log grid of (m, ε) with `m_ρ = m_σ = m`.

use entcont::alaff::ours_minus_ae;

use super::ExperimentOutput;
use crate::config::ExperimentConfig;
use crate::output::{Cell, CheckRecord, Outcome, Table};
use crate::CliError;

/// `n` log-spaced points from `lo` to `hi`; a single point sits at `lo`.
pub fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let (lo, hi) = cfg.min_eig_range;
    let axis = log_axis(lo, hi, cfg.grid);
    let tol = cfg.tolerances.get("heatmap");
    let mut table = Table::new(vec!["m", "eps", "ours_minus_ae"]);
    let mut outcomes = Vec::with_capacity(axis.len() * axis.len());
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for &m in &axis {
        for &eps in &axis {
            let v = ours_minus_ae(eps.min(1.0), m)?;
            table.push(vec![Cell::Real(m), Cell::Real(eps), Cell::Real(v)]);
            max = max.max(v);
            min = min.min(v);
            outcomes.push(if v.is_finite() && v <= 2.0 + tol {
                Outcome::Pass
            } else {
                Outcome::Fail(format!("m = {m:e}, ε = {eps:e}: ours − AE = {v}"))
            });
        }
    }
    let mut out = ExperimentOutput { table, ..Default::default() };
    out.checks.push(CheckRecord::from_outcomes("gap_at_most_two", cfg.seed, cfg.experiment.name(), &outcomes));
    out.statistics.insert("max_gap".into(), max);
    out.statistics.insert("min_gap".into(), min);
    Ok(out)
}
