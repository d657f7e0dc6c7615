//! Scalar remainder functions and the β₀-weighted quadrature behind the
//! almost-concavity constants of the Umegaki and BS relative entropies.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use num_complex::Complex64;

use crate::entropies::{bs_entropy, umegaki, ExtendedReal};
use crate::error::{param, Error, Result};
use crate::linops::{self, CMatrix, HermitianOperator};
use crate::statekit::DensityMatrix;

/// `h(p) = −p log p − (1−p) log(1−p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_unit(p)?;
    Ok(neg_xlogx(p) + neg_xlogx(1.0 - p))
}

fn neg_xlogx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

fn check_unit(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("p = {p} outside [0, 1]"));
    }
    Ok(())
}

/// `f_{c₁,c₂}(p) = p log(p + (1−p)c₁) + (1−p) log((1−p) + p c₂)`.
pub fn f_c(p: f64, c1: f64, c2: f64) -> Result<f64> {
    check_unit(p)?;
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return param(format!("constants must be non-negative, got ({c1}, {c2})"));
    }
    let a = if p > 0.0 { p * (p + (1.0 - p) * c1).ln() } else { 0.0 };
    let b = if p < 1.0 { (1.0 - p) * ((1.0 - p) + p * c2).ln() } else { 0.0 };
    Ok(a + b)
}

/// `−p log(p) tr A₁ − (1−p) log(1−p) tr A₂`.
pub fn distorted_h(p: f64, tr_a1: f64, tr_a2: f64) -> Result<f64> {
    check_unit(p)?;
    if !(tr_a1 >= 0.0 && tr_a2 >= 0.0) {
        return param("traces must be non-negative");
    }
    Ok(neg_xlogx(p) * tr_a1 + neg_xlogx(1.0 - p) * tr_a2)
}

/// `g_d(p) = d p^{−1/d} h(p) − log(1 − p^{1/d})`, `g_d(0) = 0`; infinite at 1.
pub fn g_d(p: f64, d: usize) -> Result<f64> {
    check_unit(p)?;
    if d < 2 {
        return param(format!("g_d needs d >= 2, got {d}"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p >= 1.0 {
        return Err(Error::Infinite(format!("g_{d}(1)")));
    }
    let root = p.powf(1.0 / d as f64);
    Ok(d as f64 / root * binary_entropy(p)? - (-root).ln_1p())
}

#[derive(Clone)]
enum Kind {
    Zero,
    Binary,
    Fc(f64, f64),
    Distorted(f64, f64),
    Gd(usize),
    Scaled(f64, Arc<RemainderFn>),
    Sum(Vec<RemainderFn>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A remainder `p ↦ E(p)` on `[0, 1]` with its label and parameters.
#[derive(Clone)]
pub struct RemainderFn {
    kind: Kind,
    pub label: String,
    pub params: Vec<(String, f64)>,
    /// Whether `E(t)/(1−t)` is known to be non-decreasing, so that its
    /// running maximum is the value itself.
    pub monotone_envelope_known: bool,
}

impl fmt::Debug for RemainderFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemainderFn")
            .field("label", &self.label)
            .field("params", &self.params)
            .field("monotone_envelope_known", &self.monotone_envelope_known)
            .finish()
    }
}

impl RemainderFn {
    pub fn zero() -> Self {
        Self { kind: Kind::Zero, label: "0".into(), params: Vec::new(), monotone_envelope_known: true }
    }

    pub fn binary_entropy() -> Self {
        Self { kind: Kind::Binary, label: "h".into(), params: Vec::new(), monotone_envelope_known: true }
    }

    pub fn f_c(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 >= 0.0 && c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
            return param(format!("constants must be finite and non-negative, got ({c1}, {c2})"));
        }
        Ok(Self {
            kind: Kind::Fc(c1, c2),
            label: "f_c".into(),
            params: alloc::vec![("c1".into(), c1), ("c2".into(), c2)],
            monotone_envelope_known: c1 >= 1.0 && c2 >= 1.0,
        })
    }

    pub fn distorted_h(tr_a1: f64, tr_a2: f64) -> Result<Self> {
        if !(tr_a1 >= 0.0 && tr_a2 >= 0.0) {
            return param("traces must be non-negative");
        }
        Ok(Self {
            kind: Kind::Distorted(tr_a1, tr_a2),
            label: "h_A1A2".into(),
            params: alloc::vec![("trA1".into(), tr_a1), ("trA2".into(), tr_a2)],
            monotone_envelope_known: tr_a1 == tr_a2,
        })
    }

    pub fn g_d(d: usize) -> Result<Self> {
        if d < 2 {
            return param(format!("g_d needs d >= 2, got {d}"));
        }
        Ok(Self {
            kind: Kind::Gd(d),
            label: format!("g_{d}"),
            params: alloc::vec![("d".into(), d as f64)],
            monotone_envelope_known: true,
        })
    }

    /// `k · E` for `k ≥ 0`.
    pub fn scaled(self, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return param(format!("scale must be finite and non-negative, got {k}"));
        }
        let label = format!("{k}*{}", self.label);
        let known = self.monotone_envelope_known;
        Ok(Self { kind: Kind::Scaled(k, Arc::new(self)), label, params: alloc::vec![("k".into(), k)], monotone_envelope_known: known })
    }

    pub fn sum(parts: Vec<RemainderFn>) -> Self {
        let known = parts.iter().all(|p| p.monotone_envelope_known);
        let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join("+");
        Self { kind: Kind::Sum(parts), label, params: Vec::new(), monotone_envelope_known: known }
    }

    /// Arbitrary remainder; its envelope is always computed on a grid.
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { kind: Kind::Custom(Arc::new(f)), label: label.into(), params: Vec::new(), monotone_envelope_known: false }
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        check_unit(p)?;
        match &self.kind {
            Kind::Zero => Ok(0.0),
            Kind::Binary => binary_entropy(p),
            Kind::Fc(a, b) => f_c(p, *a, *b),
            Kind::Distorted(a, b) => distorted_h(p, *a, *b),
            Kind::Gd(d) => g_d(p, *d),
            Kind::Scaled(k, inner) => Ok(k * inner.eval(p)?),
            Kind::Sum(parts) => parts.iter().map(|r| r.eval(p)).sum(),
            Kind::Custom(f) => Ok(f(p)),
        }
    }
}

/// Initial grid size of the envelope search.
pub const ENVELOPE_GRID: usize = 1025;
const ENVELOPE_MAX_GRID: usize = (1 << 21) + 1;

/// `E^max(p) = (1−p) max_{0≤t≤p} E(t)/(1−t)`.
pub fn ef_max(e: &RemainderFn, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return param(format!("p = {p} outside [0, 1)"));
    }
    if e.monotone_envelope_known || p == 0.0 {
        return e.eval(p);
    }
    let scan = |n: usize| -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for k in 0..n {
            let t = p * k as f64 / (n - 1) as f64;
            best = best.max(e.eval(t)? / (1.0 - t));
        }
        Ok(best)
    };
    let mut n = ENVELOPE_GRID;
    let mut prev = scan(n)?;
    while n < ENVELOPE_MAX_GRID {
        n = 2 * n - 1;
        let next = scan(n)?;
        if (next - prev).abs() < 1e-10 {
            return Ok((1.0 - p) * next);
        }
        prev = next;
    }
    Ok((1.0 - p) * prev)
}

/// `β₀(t) = (π/2) / (cosh(πt) + 1)`.
pub fn beta0(t: f64) -> f64 {
    FRAC_PI_2 / ((PI * t).cosh() + 1.0)
}

/// Mass of β₀ outside `[−T, T]`, bounded by `2e^{−πT}`.
pub fn beta0_tail_bound(truncation: f64) -> f64 {
    2.0 * (-PI * truncation).exp()
}

/// Truncation, starting node count and target error of a β₀ quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub truncation: f64,
    pub nodes: usize,
    pub target_abs_err: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { truncation: 12.0, nodes: 257, target_abs_err: 1e-11, max_nodes: 16385 }
    }
}

impl QuadratureSpec {
    pub fn tail_bound(&self) -> f64 {
        beta0_tail_bound(self.truncation)
    }

    fn validate(&self) -> Result<()> {
        if !(self.truncation > 0.0) || self.nodes < 3 || self.nodes % 2 == 0 || !(self.target_abs_err > 0.0) {
            return param("quadrature spec needs T > 0, an odd node count >= 3 and a positive target");
        }
        if self.tail_bound() > self.target_abs_err / 2.0 {
            return param(format!("tail bound {:e} exceeds half the target error", self.tail_bound()));
        }
        Ok(())
    }
}

const SINH_RANGE: f64 = 3.5;

/// Nodes `t` and weights of the double-exponential rule on `[−T, T]`, times
/// β₀, ordered by ascending `|t|`.
pub fn beta0_nodes(truncation: f64, nodes: usize) -> Vec<(f64, f64)> {
    let half = (nodes - 1) / 2;
    let h = SINH_RANGE / half as f64;
    let mut out = Vec::with_capacity(nodes);
    for k in 0..=half {
        let u = k as f64 * h;
        let s = FRAC_PI_2 * u.sinh();
        let ch = s.cosh();
        let t = truncation * s.tanh();
        let w = truncation * h * FRAC_PI_2 * u.cosh() / (ch * ch) * beta0(t);
        if k == 0 {
            out.push((t, w));
        } else {
            out.push((t, w));
            out.push((-t, w));
        }
    }
    out
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `∫ β₀(t) g(t) dt` on a fixed rule with `nodes` points.
pub fn beta0_quadrature_fixed<G: FnMut(f64) -> f64>(mut g: G, truncation: f64, nodes: usize) -> f64 {
    let terms: Vec<f64> = beta0_nodes(truncation, nodes).into_iter().map(|(t, w)| w * g(t)).collect();
    pairwise_sum(&terms)
}

/// `∫ β₀(t) g(t) dt`, doubling nodes until two successive estimates agree to
/// half the target.
pub fn beta0_quadrature<G: FnMut(f64) -> f64>(mut g: G, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut n = spec.nodes;
    let mut prev = beta0_quadrature_fixed(&mut g, spec.truncation, n);
    loop {
        let next_n = 2 * n - 1;
        if next_n > spec.max_nodes {
            return Err(Error::Quadrature { last: prev, previous: f64::NAN });
        }
        let next = beta0_quadrature_fixed(&mut g, spec.truncation, next_n);
        if !next.is_finite() {
            return Err(Error::Quadrature { last: next, previous: prev });
        }
        if (next - prev).abs() <= spec.target_abs_err / 2.0 {
            return Ok(next);
        }
        if 2 * next_n - 1 > spec.max_nodes {
            return Err(Error::Quadrature { last: next, previous: prev });
        }
        prev = next;
        n = next_n;
    }
}

/// Oscillatory sum `t ↦ Re Σ w_k e^{i t ω_k}` describing a constant's integrand
/// in an eigenbasis.
#[derive(Debug, Clone)]
pub struct PhaseSum {
    terms: Vec<(f64, Complex64)>,
}

impl PhaseSum {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(w, a)| (a * Complex64::new(0.0, t * w).exp()).re).sum()
    }

    pub fn integrate(&self, spec: &QuadratureSpec) -> Result<f64> {
        beta0_quadrature(|t| self.eval(t), spec)
    }
}

/// Integrand of `c₁`: `tr[ρ₁ σ₁^{(it−1)/2} σ₂ σ₁^{(−it−1)/2}]` on the support of σ₁.
pub fn re_integrand(rho1: &HermitianOperator, sigma1: &HermitianOperator, sigma2: &HermitianOperator) -> PhaseSum {
    let thr = sigma1.default_threshold();
    let s2 = sigma1.to_eigenbasis(sigma2.entries());
    let r1 = sigma1.to_eigenbasis(rho1.entries());
    let lam = sigma1.eigenvalues();
    let mut terms = Vec::new();
    for k in 0..lam.len() {
        if lam[k] <= thr {
            continue;
        }
        for l in 0..lam.len() {
            if lam[l] <= thr {
                continue;
            }
            let amp = s2[(k, l)] * r1[(l, k)] / (lam[k] * lam[l]).sqrt();
            terms.push(((lam[k].ln() - lam[l].ln()) / 2.0, amp));
        }
    }
    PhaseSum { terms }
}

/// Integrand of `ĉ₁`: `tr[ρ₁ X^{(it+1)/2} Y X^{(−it+1)/2}]` with
/// `X = ρ₁^{1/2}σ₁⁻¹ρ₁^{1/2}` and `Y = ρ₁^{−1/2}σ₂ρ₁^{−1/2}`.
pub fn bs_integrand(rho1: &HermitianOperator, sigma1: &HermitianOperator, sigma2: &HermitianOperator) -> Result<PhaseSum> {
    let (x, y) = bs_xy(rho1, sigma1, sigma2)?;
    let thr = x.default_threshold();
    let yb = x.to_eigenbasis(&y);
    let rb = x.to_eigenbasis(rho1.entries());
    let mu = x.eigenvalues();
    let mut terms = Vec::new();
    for k in 0..mu.len() {
        if mu[k] <= thr {
            continue;
        }
        for l in 0..mu.len() {
            if mu[l] <= thr {
                continue;
            }
            let amp = yb[(k, l)] * rb[(l, k)] * (mu[k] * mu[l]).sqrt();
            terms.push(((mu[k].ln() - mu[l].ln()) / 2.0, amp));
        }
    }
    Ok(PhaseSum { terms })
}

/// `(X, Y)` of the BS constants.
pub fn bs_xy(rho1: &HermitianOperator, sigma1: &HermitianOperator, sigma2: &HermitianOperator) -> Result<(HermitianOperator, CMatrix)> {
    let rh = rho1.power_on_support(0.5, None)?.into_entries();
    let rih = rho1.power_on_support(-0.5, None)?.into_entries();
    let s_inv = sigma1.power_on_support(-1.0, None)?.into_entries();
    let x = HermitianOperator::new(&rh * s_inv * &rh)?;
    let y = &rih * sigma2.entries() * &rih;
    Ok((x, y))
}

fn kernel_ok(rho: &HermitianOperator, sigma: &HermitianOperator) -> bool {
    linops::kernel_included(sigma, rho.entries(), crate::entropies::KERNEL_TOL * rho.dim() as f64)
}

fn require_full_rank(sigma: &HermitianOperator, name: &str) -> Result<()> {
    if sigma.min_eigenvalue() <= sigma.default_threshold() {
        return Err(Error::Singular(name.into()));
    }
    Ok(())
}

/// Umegaki almost-concavity constants `(c₁, c₂)`.
pub fn re_constants(
    rho1: &DensityMatrix,
    sigma1: &DensityMatrix,
    rho2: &DensityMatrix,
    sigma2: &DensityMatrix,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !kernel_ok(rho1.op(), sigma1.op()) || !kernel_ok(rho2.op(), sigma2.op()) {
        return Err(Error::Kernel("ker σ_j must lie in ker ρ_j".into()));
    }
    let c1 = re_integrand(rho1.op(), sigma1.op(), sigma2.op()).integrate(spec)?;
    let c2 = re_integrand(rho2.op(), sigma2.op(), sigma1.op()).integrate(spec)?;
    Ok((c1, c2))
}

/// BS almost-concavity constants `(ĉ₀, ĉ₁, ĉ₂)`; both σ's must be invertible.
pub fn bs_constants(
    rho1: &DensityMatrix,
    sigma1: &DensityMatrix,
    rho2: &DensityMatrix,
    sigma2: &DensityMatrix,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    require_full_rank(sigma1.op(), "σ₁")?;
    require_full_rank(sigma2.op(), "σ₂")?;
    let c0 = (1.0 / sigma1.op().min_eigenvalue()).max(1.0 / sigma2.op().min_eigenvalue());
    let c1 = bs_integrand(rho1.op(), sigma1.op(), sigma2.op())?.integrate(spec)?;
    let c2 = bs_integrand(rho2.op(), sigma2.op(), sigma1.op())?.integrate(spec)?;
    Ok((c0, c1, c2))
}

/// Which divergence an almost-concavity check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Umegaki,
    Bs,
}

/// The four states of an almost-concavity instance.
#[derive(Debug, Clone)]
pub struct Quadruple {
    pub rho1: DensityMatrix,
    pub sigma1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub sigma2: DensityMatrix,
}

/// Trace-norm distance below which `ρ₁ = ρ₂` in the BS remainder.
pub const SAME_STATE_TOL: f64 = 1e-10;

/// Almost-concavity remainder at `p` given precomputed constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constants {
    Umegaki { c1: f64, c2: f64, half_distance: f64 },
    Bs { c0: f64, c1: f64, c2: f64, same_rho: bool },
}

impl Constants {
    pub fn of(kind: DivergenceKind, q: &Quadruple, spec: &QuadratureSpec) -> Result<Self> {
        match kind {
            DivergenceKind::Umegaki => {
                let (c1, c2) = re_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma2, spec)?;
                Ok(Constants::Umegaki { c1, c2, half_distance: q.rho1.trace_distance(&q.rho2)? })
            }
            DivergenceKind::Bs => {
                let (c0, c1, c2) = bs_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma2, spec)?;
                let same = 2.0 * q.rho1.trace_distance(&q.rho2)? <= SAME_STATE_TOL;
                Ok(Constants::Bs { c0, c1, c2, same_rho: same })
            }
        }
    }

    pub fn remainder(&self, p: f64) -> Result<f64> {
        match *self {
            Constants::Umegaki { c1, c2, half_distance } => Ok(binary_entropy(p)? * half_distance + f_c(p, c1.max(0.0), c2.max(0.0))?),
            Constants::Bs { c0, c1, c2, same_rho } => {
                let hterm = if same_rho { 0.0 } else { c0 * binary_entropy(p)? };
                Ok(hterm + f_c(p, c1.max(0.0), c2.max(0.0))?)
            }
        }
    }
}

fn divergence(kind: DivergenceKind, rho: &DensityMatrix, sigma: &DensityMatrix, name: &str) -> Result<f64> {
    let v: ExtendedReal = match kind {
        DivergenceKind::Umegaki => umegaki(rho, sigma),
        DivergenceKind::Bs => bs_entropy(rho, sigma),
    };
    v.expect_finite(name)
}

/// `p D₁ + (1−p) D₂ − D(mixture)`.
pub fn concavity_defect(kind: DivergenceKind, q: &Quadruple, p: f64) -> Result<f64> {
    check_unit(p)?;
    let rho = DensityMatrix::mix(p, &q.rho1, &q.rho2)?;
    let sigma = DensityMatrix::mix(p, &q.sigma1, &q.sigma2)?;
    let d1 = divergence(kind, &q.rho1, &q.sigma1, "D(ρ₁‖σ₁)")?;
    let d2 = divergence(kind, &q.rho2, &q.sigma2, "D(ρ₂‖σ₂)")?;
    let dm = divergence(kind, &rho, &sigma, "D(ρ‖σ)")?;
    Ok(p * d1 + (1.0 - p) * d2 - dm)
}

/// `(defect, remainder)` at `p`.
pub fn almost_concavity_defect(kind: DivergenceKind, q: &Quadruple, p: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let defect = concavity_defect(kind, q, p)?;
    let bound = Constants::of(kind, q, spec)?.remainder(p)?;
    Ok((defect, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{c, DimensionProfile};
    use crate::statekit::{maximally_mixed, sample_state, tightness_family, RngStream};
    use proptest::prelude::*;
    use rand_chacha::ChaCha20Rng;

    const LN2: f64 = core::f64::consts::LN_2;

    fn rng(seed: u64) -> ChaCha20Rng {
        RngStream::new(seed, "remainders-test").rng(0)
    }

    fn quad(r: &mut ChaCha20Rng, d: usize, m: f64) -> Quadruple {
        Quadruple {
            rho1: sample_state(d, m, r).unwrap(),
            sigma1: sample_state(d, m, r).unwrap(),
            rho2: sample_state(d, m, r).unwrap(),
            sigma2: sample_state(d, m, r).unwrap(),
        }
    }

    // Fourier transform of β₀ at frequency ω is ω / sinh ω.
    fn ft(w: f64) -> f64 {
        if w.abs() < 1e-8 {
            1.0 - w * w / 6.0
        } else {
            w / w.sinh()
        }
    }

    // c₁ from the divided-difference closed form in σ₁'s eigenbasis.
    fn c1_closed(r1: &DensityMatrix, s1: &DensityMatrix, s2: &DensityMatrix) -> f64 {
        let lam = s1.eigenvalues();
        let a = s1.op().to_eigenbasis(s2.matrix());
        let b = s1.op().to_eigenbasis(r1.matrix());
        let mut acc = 0.0;
        for k in 0..lam.len() {
            for l in 0..lam.len() {
                let dd = if (lam[k] - lam[l]).abs() < 1e-14 {
                    1.0 / lam[k]
                } else {
                    (lam[k].ln() - lam[l].ln()) / (lam[k] - lam[l])
                };
                acc += (a[(k, l)] * b[(l, k)]).re * dd;
            }
        }
        acc
    }

    fn c1hat_closed(r1: &DensityMatrix, s1: &DensityMatrix, s2: &DensityMatrix) -> f64 {
        let (x, y) = bs_xy(r1.op(), s1.op(), s2.op()).unwrap();
        let mu = x.eigenvalues();
        let yb = x.to_eigenbasis(&y);
        let rb = x.to_eigenbasis(r1.matrix());
        let mut acc = 0.0;
        for k in 0..mu.len() {
            for l in 0..mu.len() {
                let w = (mu[k].ln() - mu[l].ln()) / 2.0;
                acc += (yb[(k, l)] * rb[(l, k)]).re * (mu[k] * mu[l]).sqrt() * ft(w);
            }
        }
        acc
    }

    #[test]
    fn scalar_examples() {
        assert!((binary_entropy(0.5).unwrap() - LN2).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            assert!(f_c(p, 1.0, 1.0).unwrap().abs() < 1e-15);
        }
        assert!(binary_entropy(1.5).is_err());
        assert!(f_c(0.3, -1.0, 1.0).is_err());
        assert!(g_d(0.3, 1).is_err());
        assert_eq!(g_d(0.0, 3).unwrap(), 0.0);
        assert!(g_d(1.0, 3).is_err());
        assert!((distorted_h(0.3, 1.0, 1.0).unwrap() - binary_entropy(0.3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn g2_quarter_by_series() {
        // ln 2 = Σ 1/(k 2^k), ln(3/4) = −Σ 4^{−k}/k.
        let ln2: f64 = (1..200).map(|k| 1.0 / (k as f64 * 2f64.powi(k))).sum();
        let ln34: f64 = -(1..200).map(|k| 0.25f64.powi(k) / k as f64).sum::<f64>();
        let h = -0.25 * (-2.0 * ln2) - 0.75 * ln34;
        // q = 0.25^{1/2} = 1/2, −log(1 − q) = ln 2.
        let g = 2.0 / 0.5 * h + ln2;
        assert!((g_d(0.25, 2).unwrap() - g).abs() < 1e-10);
    }

    #[test]
    fn g_d_small_p_decreases_to_zero() {
        for d in [2usize, 3, 5, 10] {
            let mut prev = f64::INFINITY;
            for k in 2..=16 {
                let v = g_d(10f64.powi(-k), d).unwrap();
                assert!(v < prev && v > 0.0);
                prev = v;
            }
            assert!(g_d(1e-300, d).unwrap() < 1e-20);
        }
    }

    #[test]
    fn lemma_sqrt_bounds_on_grid() {
        for k in 0..=1000 {
            let e = k as f64 / 1000.0;
            let lhs = (1.0 + e) * binary_entropy(e / (1.0 + e)).unwrap();
            assert!((2.0 * e).sqrt() - lhs >= -1e-12, "eps = {e}");
            for m in [0.4, 0.1, 0.01] {
                let l = 1.0 - m;
                let lhs = (l + e) / l * f_c(e / (l + e), 1.0 / m, 1.0 / m).unwrap();
                let rhs = e / l * (1.0 / m).ln() + (1.0 + e / (l + e) / m).ln();
                assert!(rhs - lhs >= -1e-12, "eps = {e}, m = {m}");
            }
        }
    }

    #[test]
    fn g_d_monotonicity_grids() {
        for d in [2usize, 3, 5, 10] {
            let mut prev = 0.0;
            for k in 1..=5000 {
                let v = g_d(k as f64 * 1e-4, d).unwrap();
                assert!(v - prev >= -1e-12);
                prev = v;
            }
            let mut prev = 0.0;
            for k in 1..=9999 {
                let p = k as f64 * 1e-4;
                let v = g_d(p, d).unwrap() / (1.0 - p);
                assert!(v - prev >= -1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let spec = QuadratureSpec::default();
        assert!((beta0_quadrature(|_| 1.0, &spec).unwrap() - 1.0).abs() < 1e-10);
        assert!(beta0_quadrature(|t| t, &spec).unwrap().abs() < 1e-10);
        let vals: Vec<f64> = [10.0, 12.0, 14.0]
            .iter()
            .map(|&tr| beta0_quadrature(f64::cos, &QuadratureSpec { truncation: tr, ..spec }).unwrap())
            .collect();
        assert!((vals[0] - vals[1]).abs() < 1e-10 && (vals[1] - vals[2]).abs() < 1e-10);
        assert!((vals[1] - ft(1.0)).abs() < 1e-10);
        assert!((beta0_quadrature_fixed(|_| 1.0, 12.0, 2049) - 1.0).abs() < 1e-10);
        let a = beta0_quadrature_fixed(|t| (0.7 * t).cos(), 12.0, 2049);
        let b = beta0_quadrature_fixed(|t| (0.7 * t).cos(), 12.0, 4097);
        let c_ = beta0_quadrature_fixed(|t| (0.7 * t).cos(), 12.0, 1025);
        assert!((a - b).abs() < 1e-10 && (a - c_).abs() < 1e-10);
        assert!(spec.tail_bound() <= spec.target_abs_err / 2.0);
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        let spec = QuadratureSpec { nodes: 3, max_nodes: 9, ..Default::default() };
        match beta0_quadrature(|t| (40.0 * t).cos(), &spec) {
            Err(Error::Quadrature { .. }) => {}
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn integrand_matches_matrix_powers() {
        let mut r = rng(3);
        let q = quad(&mut r, 3, 1e-2);
        let ps = re_integrand(q.rho1.op(), q.sigma1.op(), q.sigma2.op());
        let bs = bs_integrand(q.rho1.op(), q.sigma1.op(), q.sigma2.op()).unwrap();
        let (x, y) = bs_xy(q.rho1.op(), q.sigma1.op(), q.sigma2.op()).unwrap();
        for t in [-3.0, -0.4, 0.0, 1.1, 5.0] {
            let a = q.sigma1.op().matrix_fn_on_support(|l| Complex64::new(l, 0.0).powc(Complex64::new(-0.5, t / 2.0)), None).unwrap();
            let b = q.sigma1.op().matrix_fn_on_support(|l| Complex64::new(l, 0.0).powc(Complex64::new(-0.5, -t / 2.0)), None).unwrap();
            let direct = linops::trace_product(q.rho1.matrix(), &(a * q.sigma2.matrix() * b)).re;
            assert!((direct - ps.eval(t)).abs() < 1e-10);
            let a = x.matrix_fn_on_support(|l| Complex64::new(l, 0.0).powc(Complex64::new(0.5, t / 2.0)), None).unwrap();
            let b = x.matrix_fn_on_support(|l| Complex64::new(l, 0.0).powc(Complex64::new(0.5, -t / 2.0)), None).unwrap();
            let direct = linops::trace_product(q.rho1.matrix(), &(a * &y * b)).re;
            assert!((direct - bs.eval(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn constants_match_closed_forms() {
        let spec = QuadratureSpec::default();
        let mut r = rng(4);
        for d in [2, 3, 4] {
            for _ in 0..10 {
                let q = quad(&mut r, d, 1e-3);
                let (c1, c2) = re_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma2, &spec).unwrap();
                assert!((c1 - c1_closed(&q.rho1, &q.sigma1, &q.sigma2)).abs() < 1e-9);
                assert!((c2 - c1_closed(&q.rho2, &q.sigma2, &q.sigma1)).abs() < 1e-9);
                assert!(c1 <= 1.0 / q.sigma1.min_eig() + 1e-9);
                let (c0, h1, h2) = bs_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma2, &spec).unwrap();
                assert!((h1 - c1hat_closed(&q.rho1, &q.sigma1, &q.sigma2)).abs() < 1e-9);
                assert!((h2 - c1hat_closed(&q.rho2, &q.sigma2, &q.sigma1)).abs() < 1e-9);
                let m = q.sigma1.min_eig().min(q.sigma2.min_eig());
                assert!(h1 <= 1.0 / m + 1e-9 && h2 <= 1.0 / m + 1e-9);
                assert!((c0 - 1.0 / m).abs() < 1e-9 / m);
            }
        }
    }

    #[test]
    fn constants_reduce_to_one() {
        let spec = QuadratureSpec::default();
        let mut r = rng(5);
        let q = quad(&mut r, 3, 1e-2);
        let (c1, c2) = re_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma1, &spec).unwrap();
        assert!((c1 - 1.0).abs() < 1e-9 && (c2 - 1.0).abs() < 1e-9);
        let (_, h1, h2) = bs_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma1, &spec).unwrap();
        assert!((h1 - 1.0).abs() < 1e-9 && (h2 - 1.0).abs() < 1e-9);
        let mm = maximally_mixed(3).unwrap();
        let (c0, _, _) = bs_constants(&q.rho1, &mm, &q.rho2, &mm, &spec).unwrap();
        assert!((c0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_reduction_gives_one() {
        let spec = QuadratureSpec::default();
        let mut r = rng(6);
        let prof = DimensionProfile::bipartite(2, 2);
        let r1 = sample_state(4, 1e-2, &mut r).unwrap().with_profile(prof.clone()).unwrap();
        let r2 = sample_state(4, 1e-2, &mut r).unwrap().with_profile(prof).unwrap();
        let red = |s: &DensityMatrix| {
            let b = s.partial_trace(&[1]).unwrap();
            DensityMatrix::new(linops::tensor(&(linops::identity(2) * c(0.5)), b.matrix())).unwrap()
        };
        let (c1, c2) = re_constants(&r1, &red(&r1), &r2, &red(&r2), &spec).unwrap();
        assert!((c1 - 1.0).abs() < 1e-9 && (c2 - 1.0).abs() < 1e-9, "{c1} {c2}");
    }

    #[test]
    fn tightness_family_saturates() {
        let spec = QuadratureSpec::default();
        let f = tightness_family(0.25, 0.3, 2).unwrap();
        let q = Quadruple { rho1: f.rho1, sigma1: f.sigma1, rho2: f.rho2, sigma2: f.sigma2 };
        let (c1, c2) = re_constants(&q.rho1, &q.sigma1, &q.rho2, &q.sigma2, &spec).unwrap();
        assert!((c1 - 3.0).abs() < 1e-9 && (c2 - 3.0).abs() < 1e-9);
        let (defect, bound) = almost_concavity_defect(DivergenceKind::Umegaki, &q, 0.3, &spec).unwrap();
        assert!((defect - bound).abs() < 1e-8);
    }

    #[test]
    fn identical_pairs_have_zero_defect() {
        let spec = QuadratureSpec::default();
        let mut r = rng(7);
        let a = sample_state(2, 1e-2, &mut r).unwrap();
        let b = sample_state(2, 1e-2, &mut r).unwrap();
        let q = Quadruple { rho1: a.clone(), sigma1: b.clone(), rho2: a, sigma2: b };
        for kind in [DivergenceKind::Umegaki, DivergenceKind::Bs] {
            let (defect, bound) = almost_concavity_defect(kind, &q, 0.4, &spec).unwrap();
            assert!(defect.abs() < 1e-12);
            assert!(bound.abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_examples() {
        let h = RemainderFn::binary_entropy();
        for k in 0..=50 {
            let p = k as f64 / 100.0;
            assert!((ef_max(&h, p).unwrap() - binary_entropy(p).unwrap()).abs() < 1e-15);
        }
        let m = 0.1;
        let e = RemainderFn::sum(alloc::vec![RemainderFn::f_c(1.0 / m, 1.0 / m).unwrap(), RemainderFn::binary_entropy().scaled(1.0 / m).unwrap()]);
        assert!(e.monotone_envelope_known);
        let grid = RemainderFn::custom("grid copy", {
            let e = e.clone();
            move |p| e.eval(p).unwrap()
        });
        for p in [0.05, 0.2, 0.45] {
            assert!((ef_max(&grid, p).unwrap() - e.eval(p).unwrap()).abs() < 1e-10);
        }
        let bump = RemainderFn::custom("t(1-t)", |t| t * (1.0 - t));
        for k in 1..20 {
            let p = k as f64 / 20.0;
            assert!(ef_max(&bump, p).unwrap() >= bump.eval(p).unwrap() - 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn defect_between_zero_and_bound(seed in any::<u64>(), d in 2usize..5, pk in 1usize..10) {
            let spec = QuadratureSpec::default();
            let q = quad(&mut rng(seed), d, 1e-3);
            let p = pk as f64 / 10.0;
            for kind in [DivergenceKind::Umegaki, DivergenceKind::Bs] {
                let (defect, bound) = almost_concavity_defect(kind, &q, p, &spec).unwrap();
                prop_assert!(defect >= -1e-8);
                prop_assert!(defect <= bound + 1e-8);
            }
        }

        #[test]
        fn subminorized_constants_reduce(seed in any::<u64>(), pk in 1usize..10) {
            // σ_j = m ρ_j + (1 − m) ω_j guarantees m ρ_j ≤ σ_j.
            let mut r = rng(seed);
            let spec = QuadratureSpec::default();
            let m = 0.2;
            let r1 = sample_state(2, 1e-2, &mut r).unwrap();
            let r2 = sample_state(2, 1e-2, &mut r).unwrap();
            let s1 = DensityMatrix::mix(m, &r1, &sample_state(2, 1e-2, &mut r).unwrap()).unwrap();
            let s2 = DensityMatrix::mix(m, &r2, &sample_state(2, 1e-2, &mut r).unwrap()).unwrap();
            let (c1, c2) = re_constants(&r1, &s1, &r2, &s2, &spec).unwrap();
            let p = pk as f64 / 10.0;
            let half = r1.trace_distance(&r2).unwrap();
            let lhs = f_c(p, c1, c2).unwrap() + binary_entropy(p).unwrap() * half;
            let rhs = f_c(p, 1.0 / m, 1.0 / m).unwrap() + binary_entropy(p).unwrap();
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }
}
