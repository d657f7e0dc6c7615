//! Search for `σ_B` with `−D̂(ρ_AB‖1⊗σ_B) > Ĥ_ρ(A|B)`.

use entcont::entropies::{bs_conditional_entropy, variational_candidate};
use entcont::linops::DimensionProfile;
use entcont::statekit::{sample_state, RngStream};

use super::{log_uniform, par_samples, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::output::{Cell, CheckRecord, Outcome, Table};
use crate::CliError;

/// One in this many non-violating samples is written out.
pub const KEEP_EVERY: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationSample {
    pub h_hat: f64,
    pub candidate: f64,
}

impl ViolationSample {
    pub fn margin(&self) -> f64 {
        self.candidate - self.h_hat
    }
}

pub fn sample(stream: &RngStream, index: u64, dims: (usize, usize), range: (f64, f64)) -> Result<ViolationSample, entcont::Error> {
    let (da, db) = dims;
    let mut rng = stream.rng(index);
    let m = log_uniform(&mut rng, range.0, range.1);
    let rho = sample_state(da * db, m, &mut rng)?.with_profile(DimensionProfile::bipartite(da, db))?;
    let sigma_b = sample_state(db, m.min(0.5 / db as f64), &mut rng)?;
    Ok(ViolationSample { h_hat: bs_conditional_entropy(&rho)?, candidate: variational_candidate(&rho, &sigma_b)? })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let dims = (cfg.dims[0], cfg.dims[1]);
    let stream = RngStream::new(cfg.seed, cfg.experiment.name());
    let samples: Vec<ViolationSample> =
        par_samples(cfg.samples, |i| sample(&stream, i, dims, cfg.min_eig_range)).into_iter().collect::<Result<_, _>>()?;
    let tol = cfg.tolerances.get("violation");
    let slack = cfg.tolerances.get("invariant");
    let log_da = (dims.0 as f64).ln();

    let mut table = Table::new(vec!["sample_index", "H_hat", "candidate_value", "violated", "margin"]);
    let mut range = Vec::with_capacity(samples.len());
    let mut violations = 0usize;
    let mut best_margin = f64::NEG_INFINITY;
    for (i, s) in samples.iter().enumerate() {
        let violated = s.margin() > tol;
        violations += violated as usize;
        best_margin = best_margin.max(s.margin());
        if violated || i as u64 % KEEP_EVERY == 0 {
            table.push(vec![Cell::Int(i as u64), Cell::Real(s.h_hat), Cell::Real(s.candidate), Cell::Bool(violated), Cell::Real(s.margin())]);
        }
        range.push(if s.h_hat.abs() <= log_da + slack {
            Outcome::Pass
        } else {
            Outcome::Fail(format!("Ĥ(A|B) = {} outside ±log d_A", s.h_hat))
        });
    }
    let mut out = ExperimentOutput { table, ..Default::default() };
    out.checks.push(CheckRecord::from_outcomes("bs_conditional_entropy_range", cfg.seed, cfg.experiment.name(), &range));
    out.statistics.insert("violations".into(), violations as f64);
    out.statistics.insert("samples".into(), samples.len() as f64);
    if !samples.is_empty() {
        out.statistics.insert("max_margin".into(), best_margin);
    }
    out.witness_missing = violations == 0;
    Ok(out)
}
