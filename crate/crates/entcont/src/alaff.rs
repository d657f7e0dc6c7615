//! Continuity bounds from convexity plus almost concavity, the Δ-state
//! construction, and closed-form bound evaluators for entropic quantities.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;


use crate::entropies::{umegaki, ExtendedReal};
use crate::error::{param, Error, Result};
use crate::linops::{self, c, CMatrix, HermitianOperator};
use crate::remainders::{binary_entropy, ef_max, f_c, RemainderFn};
use crate::statekit::{DensityMatrix, StatePair};

/// Tolerance of the grid checks on `a` and `b`.
const GRID_TOL: f64 = 1e-12;
const GRID_POINTS: usize = 513;

/// Inputs of the generic bound: perturbation `s`, constant `C` and the two
/// remainders `a`, `b`.
#[derive(Debug, Clone)]
pub struct AlaffProblem {
    pub s: f64,
    pub c: f64,
    pub a: RemainderFn,
    pub b: RemainderFn,
}

fn check_remainder(r: &RemainderFn, name: &str) -> Result<()> {
    let at0 = r.eval(0.0)?;
    if at0.abs() > GRID_TOL {
        return param(format!("{name} = {} does not vanish at 0 ({at0})", r.label));
    }
    let mut prev = at0;
    for k in 1..GRID_POINTS {
        let p = 0.5 * k as f64 / (GRID_POINTS - 1) as f64;
        let v = r.eval(p)?;
        if v < prev - GRID_TOL {
            return param(format!("{name} = {} decreases near p = {p}", r.label));
        }
        prev = v;
    }
    Ok(())
}

impl AlaffProblem {
    /// Validates `s ∈ [0, 1)`, `C ≥ 0`, and that `a`, `b` vanish at 0 and are
    /// non-decreasing on `[0, 1/2]` on a grid.
    pub fn new(s: f64, c: f64, a: RemainderFn, b: RemainderFn) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return param(format!("s = {s} outside [0, 1)"));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return param(format!("C = {c} must be finite and non-negative"));
        }
        check_remainder(&a, "a")?;
        check_remainder(&b, "b")?;
        Ok(Self { s, c, a, b })
    }

    /// `E = a + b`.
    pub fn remainder(&self) -> RemainderFn {
        RemainderFn::sum(alloc::vec![self.a.clone(), self.b.clone()])
    }
}

/// `C ε/(1−s) + ((1−s+ε)/(1−s)) E^max(ε/(1−s+ε))`.
pub fn alaff_bound(problem: &AlaffProblem, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return param(format!("ε = {eps} outside [0, 1]"));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let l = 1.0 - problem.s;
    let e = problem.remainder();
    Ok(problem.c * eps / l + (l + eps) / l * ef_max(&e, eps / (l + eps))?)
}

/// The perturbed normalized parts of `ρ − σ` and their common mixture.
#[derive(Debug, Clone)]
pub struct DeltaStates {
    pub gamma_plus: DensityMatrix,
    pub gamma_minus: DensityMatrix,
    pub omega_star: DensityMatrix,
    pub epsilon: f64,
    pub tau: DensityMatrix,
    pub s: f64,
}

impl DeltaStates {
    /// Largest entry of the difference between the two mixtures that should
    /// both equal `ω*`.
    pub fn interpolation_residual(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        let l = 1.0 - self.s;
        let w = l + self.epsilon;
        let left = rho.matrix() * c(l / w) + self.gamma_minus.matrix() * c(self.epsilon / w);
        let right = sigma.matrix() * c(l / w) + self.gamma_plus.matrix() * c(self.epsilon / w);
        linops::max_abs(&(&left - self.omega_star.matrix())).max(linops::max_abs(&(right - self.omega_star.matrix())))
    }
}

/// Smallest trace distance treated as `ρ ≠ σ`.
pub const DISTINCT_TOL: f64 = 1e-12;

/// `γ± = sτ + (1−s)ε⁻¹[ρ − σ]±` with `ε = ½‖ρ − σ‖₁`.
pub fn delta_states(rho: &DensityMatrix, sigma: &DensityMatrix, tau: &DensityMatrix, s: f64) -> Result<DeltaStates> {
    if !(0.0..1.0).contains(&s) {
        return param(format!("s = {s} outside [0, 1)"));
    }
    if rho.dim() != sigma.dim() || rho.dim() != tau.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim().max(tau.dim()) });
    }
    let diff = HermitianOperator::new(rho.matrix() - sigma.matrix())?;
    let eps = 0.5 * diff.trace_norm();
    if eps <= DISTINCT_TOL {
        return Err(Error::Degenerate("ρ and σ coincide".into()));
    }
    let (pos, neg) = diff.pos_neg_parts();
    let build = |part: &HermitianOperator| -> Result<DensityMatrix> {
        let m: CMatrix = tau.matrix() * c(s) + part.entries() * c((1.0 - s) / eps);
        DensityMatrix::normalized(m)
    };
    let gamma_plus = build(&pos)?;
    let gamma_minus = build(&neg)?;
    let w = 1.0 - s + eps;
    let omega = rho.matrix() * c((1.0 - s) / w) + gamma_minus.matrix() * c(eps / w);
    let omega_star = DensityMatrix::normalized(omega)?;
    Ok(DeltaStates { gamma_plus, gamma_minus, omega_star, epsilon: eps, tau: tau.clone(), s })
}

/// Outcome of [`delta_invariance_witness`] for one pair.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessEntry {
    /// Smallest eigenvalues of `γ± − m̃ρ_ref`.
    Checked { plus: f64, minus: f64 },
    Skipped,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub entries: Vec<WitnessEntry>,
    /// Every checked pair stayed above `m̃ρ_ref` up to the tolerance.
    pub holds: bool,
    pub tolerance: f64,
}

fn floor_gap(x: &DensityMatrix, floor: &CMatrix) -> Result<f64> {
    Ok(HermitianOperator::new(x.matrix() - floor)?.min_eigenvalue())
}

/// Checks that the Δ-states of each pair, perturbed with `τ = ρ_ref` at weight
/// `s`, stay above `m̃ ρ_ref`.
pub fn delta_invariance_witness(rho_ref: &DensityMatrix, m_tilde: f64, s: f64, pairs: &[StatePair]) -> Result<WitnessReport> {
    if !(m_tilde > 0.0 && m_tilde < 1.0) {
        return param(format!("m̃ = {m_tilde} outside (0, 1)"));
    }
    let tol = 1e-10;
    let floor = rho_ref.matrix() * c(m_tilde);
    let mut bad = Vec::new();
    for (i, pr) in pairs.iter().enumerate() {
        if floor_gap(&pr.rho, &floor)? < -tol || floor_gap(&pr.sigma, &floor)? < -tol {
            bad.push(i);
        }
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }
    let mut entries = Vec::with_capacity(pairs.len());
    let mut holds = true;
    for pr in pairs {
        match delta_states(&pr.rho, &pr.sigma, rho_ref, s) {
            Ok(ds) => {
                let plus = floor_gap(&ds.gamma_plus, &floor)?;
                let minus = floor_gap(&ds.gamma_minus, &floor)?;
                holds &= plus >= -tol && minus >= -tol;
                entries.push(WitnessEntry::Checked { plus, minus });
            }
            Err(Error::Degenerate(_)) => entries.push(WitnessEntry::Skipped),
            Err(e) => return Err(e),
        }
    }
    Ok(WitnessReport { entries, holds, tolerance: tol })
}

fn check_dist(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return param(format!("{name} = {x} outside [0, 1]"));
    }
    Ok(())
}

fn check_dim(d: usize, name: &str) -> Result<()> {
    if d == 0 {
        return param(format!("{name} must be positive"));
    }
    Ok(())
}

/// `(1+ε) h(ε/(1+ε))`.
fn h_plus(eps: f64) -> Result<f64> {
    Ok((1.0 + eps) * binary_entropy(eps / (1.0 + eps))?)
}

/// `((l+ε)/l) E(ε/(l+ε))` for the remainder `p ↦ f(p)`.
fn stretched<F: Fn(f64) -> Result<f64>>(eps: f64, l: f64, f: F) -> Result<f64> {
    Ok((l + eps) / l * f(eps / (l + eps))?)
}

fn f_inv(m: f64) -> impl Fn(f64) -> Result<f64> {
    move |p| f_c(p, 1.0 / m, 1.0 / m)
}

fn check_floor(m: f64, what: &str) -> Result<()> {
    if !(m > 0.0 && m <= 1.0) {
        return param(format!("{what} must lie in (0, 1], got {m}"));
    }
    Ok(())
}

fn check_bs_floor(m: f64, d_h: usize) -> Result<f64> {
    check_dim(d_h, "d_H")?;
    let l = 1.0 - d_h as f64 * m;
    if !(m > 0.0 && l > 0.0) {
        return param(format!("requires 1/d_H > m > 0, got m = {m}, d_H = {d_h}"));
    }
    Ok(l)
}

/// Conditional entropy: `2ε log d_A + (1+ε) h(ε/(1+ε))`.
pub fn ce_bound(eps: f64, d_a: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a, "d_A")?;
    Ok(2.0 * eps * (d_a as f64).ln() + h_plus(eps)?)
}

/// Mutual information: `2ε log min{d_A, d_B} + 2(1+ε) h(ε/(1+ε))`.
pub fn mi_bound(eps: f64, d_a: usize, d_b: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a.min(d_b), "local dimension")?;
    Ok(2.0 * eps * (d_a.min(d_b) as f64).ln() + 2.0 * h_plus(eps)?)
}

/// Conditional mutual information `I(A:B|C)`; same form as [`mi_bound`].
pub fn cmi_bound(eps: f64, d_a: usize, d_b: usize) -> Result<f64> {
    mi_bound(eps, d_a, d_b)
}

/// First argument of the Umegaki divergence with `m̃` the smallest nonzero
/// eigenvalue of σ: `ε log m̃⁻¹ + (1+ε) h(ε/(1+ε))`.
pub fn re_first_bound(eps: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_floor(m, "smallest nonzero eigenvalue")?;
    Ok(eps * (1.0 / m).ln() + h_plus(eps)?)
}

/// Divergence bound `D(ρ‖σ) ≤ ε log m̃⁻¹ + (1+ε) h(ε/(1+ε))`.
pub fn re_div_bound(eps: f64, m: f64) -> Result<f64> {
    re_first_bound(eps, m)
}

/// `(1 + log m̃⁻¹/√2) √ε`.
pub fn re_div_bound_sqrt(eps: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_floor(m, "smallest nonzero eigenvalue")?;
    Ok((1.0 + (1.0 / m).ln() / SQRT_2) * eps.sqrt())
}

fn check_sub_floor(m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return param(format!("requires 1 > m̃ > 0, got {m}"));
    }
    Ok(1.0 - m)
}

/// Second argument on `{σ : m̃ρ ≤ σ}`:
/// `(ε/l) log m̃⁻¹ + ((l+ε)/l) f_{m̃⁻¹,m̃⁻¹}(ε/(l+ε))`, `l = 1 − m̃`.
pub fn re_second_bound(eps: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    let l = check_sub_floor(m)?;
    Ok(eps / l * (1.0 / m).ln() + stretched(eps, l, f_inv(m))?)
}

/// `2(ε/l) log m̃⁻¹ + log(1 + (ε/(l+ε))/m̃)`.
pub fn re_second_bound_simplified(eps: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    let l = check_sub_floor(m)?;
    Ok(2.0 * eps / l * (1.0 / m).ln() + (eps / (l + eps) / m).ln_1p())
}

fn check_joint(eps: f64, delta: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dist(delta, "δ")?;
    if !(m > 0.0 && 2.0 * m < 1.0) {
        return param(format!("requires 1 > 2m̃ > 0, got m̃ = {m}"));
    }
    Ok(1.0 - m)
}

/// Both arguments:
/// `(ε + δ/l) log m̃⁻¹ + (1+ε)h(ε/(1+ε)) + 2((l+δ)/l) f_{m̃⁻¹,m̃⁻¹}(δ/(l+δ))`.
pub fn re_joint_bound(eps: f64, delta: f64, m: f64) -> Result<f64> {
    let l = check_joint(eps, delta, m)?;
    Ok((eps + delta / l) * (1.0 / m).ln() + h_plus(eps)? + 2.0 * stretched(delta, l, f_inv(m))?)
}

/// `(√2 + log m̃⁻¹)√ε + 3(δ/l) log m̃⁻¹ + 2 log(1 + (δ/(l+δ))/m̃)`.
pub fn re_joint_bound_simplified(eps: f64, delta: f64, m: f64) -> Result<f64> {
    let l = check_joint(eps, delta, m)?;
    let lm = (1.0 / m).ln();
    Ok((SQRT_2 + lm) * eps.sqrt() + 3.0 * delta / l * lm + 2.0 * (delta / (l + delta) / m).ln_1p())
}

/// The triangle inequality through `σ̄ = ½(σ₁ + σ₂)`: one first-argument step
/// at `ε` and two second-argument steps at `δ/2`.
pub fn re_joint_via_midpoint(eps: f64, delta: f64, m: f64) -> Result<f64> {
    check_joint(eps, delta, m)?;
    Ok(re_first_bound(eps, m)? + 2.0 * re_second_bound(delta / 2.0, m)?)
}

/// BS-conditional entropy on states with smallest eigenvalue `≥ m`:
/// `2 l⁻¹ ε log d_A + ((l+ε)/l)(f_{m⁻¹,m⁻¹} + m⁻¹h)(ε/(l+ε))`, `l = 1 − d_H m`.
pub fn bs_ce_bound(eps: f64, m: f64, d_h: usize, d_a: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a, "d_A")?;
    let l = check_bs_floor(m, d_h)?;
    Ok(2.0 * eps / l * (d_a as f64).ln() + stretched(eps, l, |p| Ok(f_c(p, 1.0 / m, 1.0 / m)? + binary_entropy(p)? / m))?)
}

/// BS-mutual information:
/// `2 l⁻¹ ε (log min{d_A,d_B} + log m⁻¹) + ((l+ε)/l) z(ε/(l+ε))` with
/// `z = 2f_{m⁻¹,m⁻¹} + (m⁻¹ + 1)h`.
pub fn bs_mi_bound(eps: f64, m: f64, d_h: usize, d_a: usize, d_b: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a.min(d_b), "local dimension")?;
    let l = check_bs_floor(m, d_h)?;
    let cst = (d_a.min(d_b) as f64).ln() + (1.0 / m).ln();
    Ok(2.0 * eps / l * cst + stretched(eps, l, |p| Ok(2.0 * f_c(p, 1.0 / m, 1.0 / m)? + (1.0 / m + 1.0) * binary_entropy(p)?))?)
}

/// `(2 log min{d_A,d_B} + 4 log m⁻¹ + (√2+2)m⁻¹ + √2)/l · √ε`.
pub fn bs_mi_bound_sqrt(eps: f64, m: f64, d_h: usize, d_a: usize, d_b: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a.min(d_b), "local dimension")?;
    let l = check_bs_floor(m, d_h)?;
    let k = 2.0 * (d_a.min(d_b) as f64).ln() + 4.0 * (1.0 / m).ln() + (SQRT_2 + 2.0) / m + SQRT_2;
    Ok(k / l * eps.sqrt())
}

/// BS-conditional mutual information:
/// `2ε l⁻¹ log min{d_A, √d_ABC} + 2((l+ε)/l)(f_{m⁻¹,m⁻¹} + m⁻¹h)(ε/(l+ε))`.
pub fn bs_cmi_bound(eps: f64, m: f64, d_h: usize, d_a: usize, d_abc: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a.min(d_abc), "dimension")?;
    let l = check_bs_floor(m, d_h)?;
    let lg = (d_a as f64).ln().min(0.5 * (d_abc as f64).ln());
    Ok(2.0 * eps / l * lg + 2.0 * stretched(eps, l, |p| Ok(f_c(p, 1.0 / m, 1.0 / m)? + binary_entropy(p)? / m))?)
}

/// `(2 log min{d_A, √d_ABC} + 2 log m⁻¹ + 2(√2+1)m⁻¹)/l · √ε`.
pub fn bs_cmi_bound_sqrt(eps: f64, m: f64, d_h: usize, d_a: usize, d_abc: usize) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_dim(d_a.min(d_abc), "dimension")?;
    let l = check_bs_floor(m, d_h)?;
    let lg = (d_a as f64).ln().min(0.5 * (d_abc as f64).ln());
    Ok((2.0 * lg + 2.0 * (1.0 / m).ln() + 2.0 * (SQRT_2 + 1.0) / m) / l * eps.sqrt())
}

/// First argument of the BS-entropy with σ invertible, smallest eigenvalue
/// `m`: `ε log m⁻¹ + (1+ε) m⁻¹ h(ε/(1+ε))`.
pub fn bs_first_bound(eps: f64, m: f64) -> Result<f64> {
    check_dist(eps, "ε")?;
    check_floor(m, "smallest eigenvalue")?;
    Ok(eps * (1.0 / m).ln() + h_plus(eps)? / m)
}

/// `D̂(ρ‖σ) ≤ ε log m⁻¹ + (1+ε) m⁻¹ h(ε/(1+ε))`.
pub fn bs_div_bound(eps: f64, m: f64) -> Result<f64> {
    bs_first_bound(eps, m)
}

/// Tight bound and, where available, its √ε simplification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundForms {
    pub tight: f64,
    pub simplified: Option<f64>,
}

/// Every closed-form continuity bound with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    Ce { d_a: usize },
    Mi { d_a: usize, d_b: usize },
    Cmi { d_a: usize, d_b: usize },
    ReFirst { m: f64 },
    ReDiv { m: f64 },
    ReSecond { m: f64 },
    ReJoint { delta: f64, m: f64 },
    BsCe { m: f64, d_h: usize, d_a: usize },
    BsMi { m: f64, d_h: usize, d_a: usize, d_b: usize },
    BsCmi { m: f64, d_h: usize, d_a: usize, d_abc: usize },
    BsFirst { m: f64 },
    BsDiv { m: f64 },
}

impl Catalog {
    pub fn name(&self) -> &'static str {
        match self {
            Catalog::Ce { .. } => "ce",
            Catalog::Mi { .. } => "mi",
            Catalog::Cmi { .. } => "cmi",
            Catalog::ReFirst { .. } => "re_first",
            Catalog::ReDiv { .. } => "re_div",
            Catalog::ReSecond { .. } => "re_second",
            Catalog::ReJoint { .. } => "re_joint",
            Catalog::BsCe { .. } => "bs_ce",
            Catalog::BsMi { .. } => "bs_mi",
            Catalog::BsCmi { .. } => "bs_cmi",
            Catalog::BsFirst { .. } => "bs_first",
            Catalog::BsDiv { .. } => "bs_div",
        }
    }

    pub fn evaluate(&self, eps: f64) -> Result<BoundForms> {
        let (tight, simplified) = match *self {
            Catalog::Ce { d_a } => (ce_bound(eps, d_a)?, None),
            Catalog::Mi { d_a, d_b } => (mi_bound(eps, d_a, d_b)?, None),
            Catalog::Cmi { d_a, d_b } => (cmi_bound(eps, d_a, d_b)?, None),
            Catalog::ReFirst { m } => (re_first_bound(eps, m)?, None),
            Catalog::ReDiv { m } => (re_div_bound(eps, m)?, Some(re_div_bound_sqrt(eps, m)?)),
            Catalog::ReSecond { m } => (re_second_bound(eps, m)?, Some(re_second_bound_simplified(eps, m)?)),
            Catalog::ReJoint { delta, m } => (re_joint_bound(eps, delta, m)?, Some(re_joint_bound_simplified(eps, delta, m)?)),
            Catalog::BsCe { m, d_h, d_a } => (bs_ce_bound(eps, m, d_h, d_a)?, None),
            Catalog::BsMi { m, d_h, d_a, d_b } => (bs_mi_bound(eps, m, d_h, d_a, d_b)?, Some(bs_mi_bound_sqrt(eps, m, d_h, d_a, d_b)?)),
            Catalog::BsCmi { m, d_h, d_a, d_abc } => {
                (bs_cmi_bound(eps, m, d_h, d_a, d_abc)?, Some(bs_cmi_bound_sqrt(eps, m, d_h, d_a, d_abc)?))
            }
            Catalog::BsFirst { m } => (bs_first_bound(eps, m)?, None),
            Catalog::BsDiv { m } => (bs_div_bound(eps, m)?, None),
        };
        Ok(BoundForms { tight, simplified })
    }

    /// The generic problem that reproduces this entry, if there is one.
    ///
    /// The BS-mutual-information entry carries `2(log min{d_A,d_B} + log m⁻¹)`
    /// as its constant.
    pub fn alaff_problem(&self) -> Option<Result<AlaffProblem>> {
        let h = RemainderFn::binary_entropy;
        let f_m = |m: f64| RemainderFn::f_c(1.0 / m, 1.0 / m);
        let bs_b = |m: f64| -> Result<RemainderFn> { Ok(RemainderFn::sum(alloc::vec![f_m(m)?, h().scaled(1.0 / m)?])) };
        let build = || -> Result<Option<AlaffProblem>> {
            Ok(Some(match *self {
                Catalog::Ce { d_a } => AlaffProblem::new(0.0, 2.0 * (d_a as f64).ln(), RemainderFn::zero(), h())?,
                Catalog::Mi { d_a, d_b } | Catalog::Cmi { d_a, d_b } => {
                    AlaffProblem::new(0.0, 2.0 * (d_a.min(d_b) as f64).ln(), h(), h())?
                }
                Catalog::ReFirst { m } | Catalog::ReDiv { m } => {
                    check_floor(m, "smallest nonzero eigenvalue")?;
                    AlaffProblem::new(0.0, (1.0 / m).ln(), h(), RemainderFn::zero())?
                }
                Catalog::ReSecond { m } => {
                    check_sub_floor(m)?;
                    AlaffProblem::new(m, (1.0 / m).ln(), f_m(m)?, RemainderFn::zero())?
                }
                Catalog::ReJoint { .. } => return Ok(None),
                Catalog::BsCe { m, d_h, d_a } => {
                    check_bs_floor(m, d_h)?;
                    AlaffProblem::new(m * d_h as f64, 2.0 * (d_a as f64).ln(), RemainderFn::zero(), bs_b(m)?)?
                }
                Catalog::BsMi { m, d_h, d_a, d_b } => {
                    check_bs_floor(m, d_h)?;
                    let a = RemainderFn::sum(alloc::vec![f_m(m)?.scaled(2.0)?, h().scaled(1.0 / m)?]);
                    let cst = 2.0 * ((d_a.min(d_b) as f64).ln() + (1.0 / m).ln());
                    AlaffProblem::new(m * d_h as f64, cst, a, h())?
                }
                Catalog::BsCmi { m, d_h, d_a, d_abc } => {
                    check_bs_floor(m, d_h)?;
                    let lg = (d_a as f64).ln().min(0.5 * (d_abc as f64).ln());
                    AlaffProblem::new(m * d_h as f64, 2.0 * lg, bs_b(m)?, bs_b(m)?)?
                }
                Catalog::BsFirst { m } | Catalog::BsDiv { m } => {
                    check_floor(m, "smallest eigenvalue")?;
                    AlaffProblem::new(0.0, (1.0 / m).ln(), h().scaled(1.0 / m)?, RemainderFn::zero())?
                }
            }))
        };
        build().transpose()
    }
}

/// Audenaert–Eisert divergence bound; `m_ρ = 0` is the limit.
pub fn ae_bound(eps: f64, m_sigma: f64, m_rho: f64) -> Result<f64> {
    if !(m_sigma > 0.0) || !(m_rho >= 0.0) || !(eps >= 0.0) {
        return param("requires m_σ > 0, m_ρ ≥ 0, ε ≥ 0");
    }
    let first = (m_sigma + eps) * (eps / m_sigma).ln_1p();
    let second = if m_rho > 0.0 { m_rho * (eps / m_rho).ln_1p() } else { 0.0 };
    Ok(first - second)
}

/// Vershynina divergence bound `2ελ_ρ (log m_ρ − log m_σ)/(m_ρ − m_σ)`.
pub fn vershynina_bound(eps: f64, lambda_rho: f64, m_rho: f64, m_sigma: f64) -> Result<f64> {
    if !(m_rho > 0.0 && m_sigma > 0.0) || m_rho == m_sigma {
        return param("requires full-rank states with m_ρ ≠ m_σ");
    }
    Ok(2.0 * eps * lambda_rho * (m_rho.ln() - m_sigma.ln()) / (m_rho - m_sigma))
}

/// Bratteli–Robinson divergence bound `m_σ⁻¹ ‖ρ − σ‖_∞`.
pub fn br_bound(op_dist: f64, m_sigma: f64) -> Result<f64> {
    if !(m_sigma > 0.0) {
        return param("requires σ of full rank");
    }
    Ok(op_dist / m_sigma)
}

/// Divergence bounds on one pair; `None` marks an inapplicable bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitorBounds {
    pub divergence: ExtendedReal,
    pub eps: f64,
    pub m_sigma: f64,
    pub ours: Option<f64>,
    pub audenaert_eisert: Option<f64>,
    pub vershynina: Option<f64>,
    pub bratteli_robinson: Option<f64>,
}

pub fn competitor_div_bounds(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<CompetitorBounds> {
    let diff = HermitianOperator::new(rho.matrix() - sigma.matrix())?;
    let eps = 0.5 * diff.trace_norm();
    let op_dist = diff.op_norm();
    let divergence = umegaki(rho, sigma);
    let m_sigma = if sigma.is_full_rank() { sigma.min_eig() } else { 0.0 };
    let m_rho = if rho.is_full_rank() { rho.min_eig() } else { 0.0 };
    let ours = if divergence.is_finite() { Some(re_div_bound(eps.min(1.0), sigma.min_nonzero_eig())?) } else { None };
    Ok(CompetitorBounds {
        divergence,
        eps,
        m_sigma,
        ours,
        audenaert_eisert: ae_bound(eps, m_sigma, m_rho).ok(),
        vershynina: vershynina_bound(eps, rho.max_eig(), m_rho, m_sigma).ok(),
        bratteli_robinson: br_bound(op_dist, m_sigma).ok(),
    })
}

/// `ours − AE` with `m_ρ = m_σ = m`.
pub fn ours_minus_ae(eps: f64, m: f64) -> Result<f64> {
    Ok(re_div_bound(eps, m)? - ae_bound(eps, m, m)?)
}

/// Labels used when reporting catalog evaluations.
pub fn catalog_names() -> Vec<String> {
    [
        "ce", "mi", "cmi", "re_first", "re_div", "re_second", "re_joint", "bs_ce", "bs_mi", "bs_cmi", "bs_first", "bs_div",
    ]
    .iter()
    .map(|s| String::from(*s))
    .collect()
}
