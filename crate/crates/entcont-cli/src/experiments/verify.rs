//! Named invariants checked on seeded random samples.

use std::f64::consts::LN_2;

use entcont::alaff::{alaff_bound, competitor_div_bounds, AlaffProblem};
use entcont::applications::{
    athermality, cmi_sandwich, free_energy, minimal_reverse_test, petz_from_marginals, petz_recover, re_bs_gap_bounds, weak_qf,
};
use entcont::entropies::{bs_entropy_definitional, cmi_parts, conditional_entropy};
use entcont::linops::{self, DimensionProfile};
use entcont::remainders::{
    beta0_quadrature, binary_entropy, f_c, g_d, Constants, DivergenceKind, QuadratureSpec, Quadruple, RemainderFn,
};
use entcont::statekit::{
    gibbs_state, markov_marginals, random_hermitian, sample_state, sample_state_exact_min_eig, DensityMatrix, RngStream,
};
use rand::{Rng, RngCore};

use super::{log_uniform, par_samples, ExperimentOutput};
use crate::config::{ExperimentConfig, Mutation};
use crate::output::{Cell, CheckRecord, Outcome, Table};
use crate::CliError;

type CoreResult<T> = Result<T, entcont::Error>;

/// Shared state of one suite run.
pub struct Context {
    /// Binary entropy as seen by the checks; replaced under mutation.
    pub h: RemainderFn,
    pub tol: f64,
    pub tol_identity: f64,
    pub tol_reverse: f64,
    pub spec: QuadratureSpec,
}

impl Context {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let h = match cfg.mutation {
            None => RemainderFn::binary_entropy(),
            Some(Mutation::FlipEntropySign) => {
                RemainderFn::custom("negated binary entropy", |p| -binary_entropy(p).unwrap_or(f64::NAN))
            }
        };
        Context {
            h,
            tol: cfg.tolerances.get("invariant"),
            tol_identity: cfg.tolerances.get("identity"),
            tol_reverse: cfg.tolerances.get("reverse"),
            spec: QuadratureSpec::default(),
        }
    }

    fn h(&self, p: f64) -> CoreResult<f64> {
        self.h.eval(p)
    }
}

type CheckFn = fn(&Context, &mut dyn RngCore, u64) -> CoreResult<Outcome>;

pub struct CheckDef {
    pub name: &'static str,
    pub default_samples: usize,
    /// Sample count is part of the check (grids, single evaluations).
    pub fixed: bool,
    run: CheckFn,
}

const fn check(name: &'static str, default_samples: usize, fixed: bool, run: CheckFn) -> CheckDef {
    CheckDef { name, default_samples, fixed, run }
}

pub const CHECKS: [CheckDef; 14] = [
    check("binary_entropy_range", 1001, true, binary_entropy_range),
    check("beta0_normalization", 1, true, beta0_normalization),
    check("g_d_monotonicity", 4, true, g_d_monotonicity),
    check("conditional_entropy_almost_convexity", 200, false, conditional_entropy_almost_convexity),
    check("conditional_entropy_continuity", 200, false, conditional_entropy_continuity),
    check("umegaki_almost_concavity", 100, false, umegaki_almost_concavity),
    check("bs_almost_concavity", 100, false, bs_almost_concavity),
    check("divergence_bound_soundness", 200, false, divergence_bound_soundness),
    check("free_energy_identity", 200, false, free_energy_identity),
    check("reverse_test_equality", 500, false, reverse_test_equality),
    check("re_bs_gap_bounds", 200, false, gap_bounds),
    check("cmi_sandwich", 200, false, sandwich),
    check("petz_markov_chain", 50, false, petz_markov_chain),
    check("weak_quasi_factorization", 200, false, weak_quasi_factorization),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

fn verdict(ok: bool, detail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(detail())
    }
}

fn binary_entropy_range(ctx: &Context, _: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    let p = i as f64 / 1000.0;
    let h = ctx.h(p)?;
    let stretched = (1.0 + p) * ctx.h(p / (1.0 + p))?;
    Ok(verdict(h >= -ctx.tol && h <= LN_2 + ctx.tol && stretched <= (2.0 * p).sqrt() + ctx.tol, || {
        format!("p = {p}: h = {h}, (1+p)h(p/(1+p)) = {stretched}")
    }))
}

fn beta0_normalization(_: &Context, _: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let total = beta0_quadrature(|_| 1.0, &QuadratureSpec::default())?;
    Ok(verdict((total - 1.0).abs() < 1e-10, || format!("∫β₀ = {total}")))
}

fn g_d_monotonicity(_: &Context, _: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    let d = [2usize, 3, 5, 10][i as usize];
    let n = 10_000;
    let mut prev = g_d(0.0, d)?;
    let mut prev_ratio = prev;
    for k in 1..n {
        let p = k as f64 / n as f64;
        let v = g_d(p, d)?;
        let r = v / (1.0 - p);
        if p <= 0.5 && v - prev < -1e-12 {
            return Ok(Outcome::Fail(format!("d = {d}: g_d decreases at p = {p}")));
        }
        if r - prev_ratio < -1e-12 {
            return Ok(Outcome::Fail(format!("d = {d}: g_d/(1−p) decreases at p = {p}")));
        }
        prev = v;
        prev_ratio = r;
    }
    Ok(Outcome::Pass)
}

fn bipartite(rng: &mut dyn RngCore, min_eig: f64) -> CoreResult<DensityMatrix> {
    sample_state(4, min_eig, rng)?.with_profile(DimensionProfile::bipartite(2, 2))
}

fn conditional_entropy_almost_convexity(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let r1 = bipartite(rng, 0.0)?;
    let r2 = bipartite(rng, 0.0)?;
    let p: f64 = rng.random();
    let mix = DensityMatrix::mix(p, &r1, &r2)?.with_profile(DimensionProfile::bipartite(2, 2))?;
    let defect = conditional_entropy(&mix)? - p * conditional_entropy(&r1)? - (1.0 - p) * conditional_entropy(&r2)?;
    let h = ctx.h(p)?;
    Ok(verdict(defect >= -ctx.tol && defect <= h + ctx.tol, || format!("p = {p}: defect {defect}, h(p) = {h}")))
}

fn conditional_entropy_continuity(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let problem = match AlaffProblem::new(0.0, 2.0 * 2f64.ln(), RemainderFn::zero(), ctx.h.clone()) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome::Fail(format!("remainder rejected: {e}"))),
    };
    let rho = bipartite(rng, 0.0)?;
    let other = bipartite(rng, 0.0)?;
    let t: f64 = rng.random();
    let sigma = DensityMatrix::mix(t, &rho, &other)?.with_profile(DimensionProfile::bipartite(2, 2))?;
    let eps = rho.trace_distance(&sigma)?.min(1.0);
    let diff = (conditional_entropy(&rho)? - conditional_entropy(&sigma)?).abs();
    let bound = alaff_bound(&problem, eps)?;
    Ok(verdict(diff <= bound + ctx.tol, || format!("ε = {eps}: |ΔH| = {diff} > {bound}")))
}

fn quadruple(rng: &mut dyn RngCore, d: usize) -> CoreResult<Quadruple> {
    Ok(Quadruple {
        rho1: sample_state(d, 1e-3, rng)?,
        sigma1: sample_state(d, 1e-3, rng)?,
        rho2: sample_state(d, 1e-3, rng)?,
        sigma2: sample_state(d, 1e-3, rng)?,
    })
}

fn almost_concavity(ctx: &Context, rng: &mut dyn RngCore, i: u64, kind: DivergenceKind) -> CoreResult<Outcome> {
    let d = 2 + (i as usize % 3);
    let q = quadruple(rng, d)?;
    let p = 0.05 + 0.9 * rng.random::<f64>();
    let defect = entcont::remainders::concavity_defect(kind, &q, p)?;
    let bound = match Constants::of(kind, &q, &ctx.spec)? {
        Constants::Umegaki { c1, c2, half_distance } => ctx.h(p)? * half_distance + f_c(p, c1.max(0.0), c2.max(0.0))?,
        Constants::Bs { c0, c1, c2, same_rho } => {
            let hterm = if same_rho { 0.0 } else { c0 * ctx.h(p)? };
            hterm + f_c(p, c1.max(0.0), c2.max(0.0))?
        }
    };
    Ok(verdict(defect >= -ctx.tol && defect <= bound + ctx.tol, || format!("d = {d}, p = {p}: defect {defect}, bound {bound}")))
}

fn umegaki_almost_concavity(ctx: &Context, rng: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    almost_concavity(ctx, rng, i, DivergenceKind::Umegaki)
}

fn bs_almost_concavity(ctx: &Context, rng: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    almost_concavity(ctx, rng, i, DivergenceKind::Bs)
}

fn divergence_bound_soundness(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let m = log_uniform(rng, 1e-8, 1e-4);
    let sigma = sample_state_exact_min_eig(2, m, rng)?;
    let rho = sample_state(2, 0.0, rng)?;
    let b = competitor_div_bounds(&rho, &sigma)?;
    let d = b.divergence.expect_finite("D(ρ‖σ)")?;
    Ok(match b.ours {
        Some(o) => verdict(o >= d - ctx.tol, || format!("m = {m:e}: bound {o} < D {d}")),
        None => Outcome::Fail("bound unavailable".into()),
    })
}

fn free_energy_identity(ctx: &Context, rng: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    let d = 2 + (i as usize % 3);
    let beta = [0.1, 1.0, 10.0][(i as usize / 3) % 3];
    let rho = sample_state(d, 0.0, rng)?;
    let h = random_hermitian(d, 1.0, rng);
    let gibbs = gibbs_state(&h, beta)?;
    let lhs = athermality(&rho, &h, beta)?;
    let rhs = beta * (free_energy(&rho, &h, beta)? - free_energy(&gibbs, &h, beta)?);
    Ok(verdict((lhs - rhs).abs() < ctx.tol_identity, || format!("d = {d}, β = {beta}: {lhs} vs {rhs}")))
}

fn kl(p: &DensityMatrix, q: &DensityMatrix) -> f64 {
    (0..p.dim())
        .map(|k| (p.matrix()[(k, k)].re, q.matrix()[(k, k)].re))
        .filter(|(a, _)| *a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

fn reverse_test_equality(ctx: &Context, rng: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    let d = 2 + (i as usize % 3);
    let rho = sample_state(d, 1e-3, rng)?;
    let sigma = sample_state(d, 1e-3, rng)?;
    let t = minimal_reverse_test(&rho, &sigma)?;
    let classical = kl(&t.p, &t.q);
    let bs = bs_entropy_definitional(rho.op(), sigma.op()).expect_finite("D̂(ρ‖σ)")?;
    Ok(verdict((classical - bs).abs() < ctx.tol_reverse && t.min_q_level >= sigma.min_eig() - 1e-10, || {
        format!("d = {d}: D(p‖q) = {classical}, D̂ = {bs}, min level {}", t.min_q_level)
    }))
}

fn gap_bounds(ctx: &Context, rng: &mut dyn RngCore, i: u64) -> CoreResult<Outcome> {
    let d = 2 + (i as usize % 3);
    let rho = sample_state(d, 1e-3, rng)?;
    let sigma = sample_state(d, 1e-3, rng)?;
    let g = re_bs_gap_bounds(&rho, &sigma)?;
    Ok(verdict(g.gap >= -1e-9 && g.gap <= g.best() + ctx.tol, || format!("gap {} vs bounds {g:?}", g.gap)))
}

fn sandwich(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let profile = DimensionProfile::tripartite(2, 2, 2);
    let rho = sample_state(8, 1e-3, rng)?;
    let s = cmi_sandwich(&rho, &profile)?;
    Ok(verdict(s.lower.is_some() && s.holds(ctx.tol), || format!("{s:?}")))
}

fn petz_markov_chain(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let (ab, bc) = markov_marginals(2, 2, 2, 0.05, rng)?;
    let chain = petz_from_marginals(&ab, &bc)?;
    let profile = DimensionProfile::tripartite(2, 2, 2);
    let cmi = cmi_parts(&chain, &[0], &[2], &[1])?;
    let again = petz_recover(&chain, &profile)?;
    let drift = linops::max_abs(&(again.matrix() - chain.matrix()));
    Ok(verdict(cmi.abs() < ctx.tol && drift < ctx.tol, || format!("I(A:C|B) = {cmi}, fixed-point drift {drift}")))
}

fn weak_quasi_factorization(ctx: &Context, rng: &mut dyn RngCore, _: u64) -> CoreResult<Outcome> {
    let rho = sample_state(4, 0.0, rng)?;
    let sigma = sample_state(4, 1e-2, rng)?;
    let w = weak_qf(&rho, &sigma, &DimensionProfile::bipartite(2, 2))?;
    Ok(verdict(w.lhs_deficit <= w.xi + ctx.tol, || format!("deficit {} > ξ {}", w.lhs_deficit, w.xi)))
}

/// Resolves the check selection; unknown names are configuration errors.
pub fn select(cfg: &ExperimentConfig) -> Result<Vec<&'static CheckDef>, CliError> {
    match &cfg.checks {
        None => Ok(CHECKS.iter().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                CHECKS.iter().find(|c| c.name == n).ok_or_else(|| {
                    CliError::Config(format!("unknown check '{n}' (known: {})", check_names().join(", ")))
                })
            })
            .collect(),
    }
}

pub fn run_check(def: &CheckDef, ctx: &Context, cfg: &ExperimentConfig) -> CheckRecord {
    let n = if def.fixed || cfg.samples == 0 { def.default_samples } else { cfg.samples };
    let stream = RngStream::new(cfg.seed, format!("verify-suite/{}", def.name));
    let outcomes = par_samples(n, |i| {
        let mut rng = stream.rng(i);
        (def.run)(ctx, &mut rng, i).unwrap_or_else(|e| Outcome::Fail(format!("error: {e}")))
    });
    CheckRecord::from_outcomes(def.name, cfg.seed, &stream.label, &outcomes)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let selected = select(cfg)?;
    let ctx = Context::new(cfg);
    let mut table = Table::new(vec!["check", "total", "passed", "failed", "skipped"]);
    let mut out = ExperimentOutput::default();
    for def in &selected {
        let rec = run_check(def, &ctx, cfg);
        table.push(vec![
            Cell::Text(rec.name.clone()),
            Cell::Int(rec.total as u64),
            Cell::Int(rec.passed as u64),
            Cell::Int(rec.failed as u64),
            Cell::Int(rec.skipped as u64),
        ]);
        out.checks.push(rec);
    }
    out.table = table;
    out.vacuous = selected.is_empty();
    out.statistics.insert("checks".into(), selected.len() as f64);
    out.statistics.insert("failed_checks".into(), out.checks.iter().filter(|c| c.failed > 0).count() as f64);
    Ok(out)
}
