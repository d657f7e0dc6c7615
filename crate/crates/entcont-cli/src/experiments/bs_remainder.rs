//! Almost-convexity defect of the BS-conditional entropy at several
//! minimal-eigenvalue levels.

use entcont::entropies::bs_conditional_entropy;
use entcont::linops::{self, DimensionProfile};
use entcont::remainders::{Constants, DivergenceKind, QuadratureSpec, Quadruple};
use entcont::statekit::{sample_state_exact_min_eig, DensityMatrix, RngStream};

use super::{par_samples, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::output::{Cell, CheckRecord, Outcome, Table};
use crate::CliError;

pub const LEVELS: [f64; 4] = [1e-4, 1e-8, 1e-16, 1e-32];
/// Levels below this are run at this value and flagged as clamped.
pub const CLAMP: f64 = 1e-14;
pub const P_VALUES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DefectPoint {
    pub p: f64,
    pub defect: f64,
    pub bound: Option<f64>,
}

fn p_grid() -> Vec<f64> {
    (0..P_VALUES).map(|k| k as f64 / (P_VALUES - 1) as f64).collect()
}

/// `1_A ⊗ ρ_B / d_A`.
fn flat_marginal(rho: &DensityMatrix, da: usize) -> Result<DensityMatrix, entcont::Error> {
    let rb = rho.partial_trace(&[1])?;
    DensityMatrix::normalized(linops::tensor(&linops::identity(da), rb.matrix()))
}

/// `Ĥ(pρ₁ + (1−p)ρ₂) − pĤ(ρ₁) − (1−p)Ĥ(ρ₂)` on one random pair, with the BS
/// remainder of the quadruple `(ρ₁, 1⊗ρ₁_B/d_A, ρ₂, 1⊗ρ₂_B/d_A)` as bound.
pub fn sample(stream: &RngStream, index: u64, dims: (usize, usize), min_eig: f64) -> Result<Vec<DefectPoint>, entcont::Error> {
    let (da, db) = dims;
    let profile = DimensionProfile::bipartite(da, db);
    let mut rng = stream.rng(index);
    let r1 = sample_state_exact_min_eig(da * db, min_eig, &mut rng)?.with_profile(profile.clone())?;
    let r2 = sample_state_exact_min_eig(da * db, min_eig, &mut rng)?.with_profile(profile.clone())?;
    let h1 = bs_conditional_entropy(&r1)?;
    let h2 = bs_conditional_entropy(&r2)?;
    let q = Quadruple { sigma1: flat_marginal(&r1, da)?, sigma2: flat_marginal(&r2, da)?, rho1: r1.clone(), rho2: r2.clone() };
    let constants = Constants::of(DivergenceKind::Bs, &q, &QuadratureSpec::default()).ok();
    p_grid()
        .into_iter()
        .map(|p| {
            let mix = DensityMatrix::mix(p, &r1, &r2)?.with_profile(profile.clone())?;
            let defect = bs_conditional_entropy(&mix)? - p * h1 - (1.0 - p) * h2;
            let bound = constants.map(|c| c.remainder(p)).transpose()?;
            Ok(DefectPoint { p, defect, bound })
        })
        .collect()
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    best
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let dims = (cfg.dims[0], cfg.dims[1]);
    let (lo, hi) = cfg.min_eig_range;
    let levels: Vec<f64> = LEVELS.iter().copied().filter(|&m| m >= lo && m <= hi).collect();
    let base = RngStream::new(cfg.seed, cfg.experiment.name());
    let tol = cfg.tolerances.get("invariant");
    let tol_end = cfg.tolerances.get("endpoint");

    let mut table = Table::new(vec!["min_eig", "effective_min_eig", "clamped", "pair_index", "p", "defect", "bound"]);
    let mut nonneg = Vec::new();
    let mut endpoints = Vec::new();
    let mut below = Vec::new();
    // per level, per p: defect samples
    let mut curves: Vec<Vec<Vec<f64>>> = Vec::new();
    for &level in &levels {
        let effective = level.max(CLAMP);
        let stream = base.substream(&format!("level-{level:e}"));
        let pairs: Vec<Vec<DefectPoint>> =
            par_samples(cfg.samples, |i| sample(&stream, i, dims, effective)).into_iter().collect::<Result<_, _>>()?;
        let mut per_p = vec![Vec::with_capacity(pairs.len()); P_VALUES];
        for (i, points) in pairs.iter().enumerate() {
            for (k, pt) in points.iter().enumerate() {
                table.push(vec![
                    Cell::Real(level),
                    Cell::Real(effective),
                    Cell::Bool(level < CLAMP),
                    Cell::Int(i as u64),
                    Cell::Real(pt.p),
                    Cell::Real(pt.defect),
                    Cell::opt(pt.bound),
                ]);
                per_p[k].push(pt.defect);
                let at = format!("level {level:e}, pair {i}, p = {}", pt.p);
                nonneg.push(if pt.defect >= -tol { Outcome::Pass } else { Outcome::Fail(format!("{at}: defect {}", pt.defect)) });
                if pt.p == 0.0 || pt.p == 1.0 {
                    endpoints.push(if pt.defect.abs() <= tol_end {
                        Outcome::Pass
                    } else {
                        Outcome::Fail(format!("{at}: defect {}", pt.defect))
                    });
                }
                below.push(match pt.bound {
                    Some(b) if pt.defect <= b + tol => Outcome::Pass,
                    Some(b) => Outcome::Fail(format!("{at}: defect {} > remainder {b}", pt.defect)),
                    None => Outcome::Skip,
                });
            }
        }
        curves.push(per_p);
    }

    let label = cfg.experiment.name();
    let mut out = ExperimentOutput { table, ..Default::default() };
    out.checks.push(CheckRecord::from_outcomes("defect_nonnegative", cfg.seed, label, &nonneg));
    out.checks.push(CheckRecord::from_outcomes("defect_vanishes_at_endpoints", cfg.seed, label, &endpoints));
    out.checks.push(CheckRecord::from_outcomes("defect_below_bs_remainder", cfg.seed, label, &below));

    let (mut ks, mut mean_gap) = (0.0f64, 0.0f64);
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            for k in 0..P_VALUES {
                ks = ks.max(ks_distance(&curves[a][k], &curves[b][k]));
                mean_gap = mean_gap.max((mean(&curves[a][k]) - mean(&curves[b][k])).abs());
            }
        }
    }
    out.statistics.insert("max_ks_gap_between_levels".into(), ks);
    out.statistics.insert("max_mean_gap_between_levels".into(), mean_gap);
    if cfg.samples > 0 && !curves.is_empty() {
        let grid = p_grid();
        let pooled: Vec<f64> = (0..P_VALUES).map(|k| curves.iter().map(|c| mean(&c[k])).sum::<f64>()).collect();
        let peak = (0..P_VALUES).max_by(|&x, &y| pooled[x].total_cmp(&pooled[y])).unwrap_or(0);
        out.statistics.insert("peak_mean_defect_p".into(), grid[peak]);
    }
    out.statistics.insert("bound_unavailable_rows".into(), below.iter().filter(|o| **o == Outcome::Skip).count() as f64);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_known_values() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert!((ks_distance(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }
}
