//! Hypothesis testing, athermality, Petz recovery, RE/BS gaps, the minimal
//! reverse test, weak quasi-factorization and entanglement-measure bounds.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};


use crate::alaff::re_joint_bound_simplified;
use crate::entropies::{bs_entropy, cmi_parts, umegaki, von_neumann, ExtendedReal};
use crate::error::{param, Error, Result};
use crate::linops::{self, c, CMatrix, DimensionProfile, HermitianOperator};
use crate::remainders::{binary_entropy, g_d};
use crate::statekit::DensityMatrix;

fn check_unit(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return param(format!("{what} = {x} outside [0, 1]"));
    }
    Ok(())
}

fn h_plus(eps: f64) -> Result<f64> {
    Ok((1.0 + eps) * binary_entropy(eps / (1.0 + eps))?)
}

fn finite(x: ExtendedReal, what: &str) -> Result<f64> {
    x.expect_finite(what)
}

/// Optimal success probability for telling two equiprobable states apart.
pub fn helstrom_success(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let t = rho1.trace_distance(rho2)?;
    Ok((0.5 * (1.0 + t)).clamp(0.5, 1.0))
}

/// Gap between Stein exponents of two sources whose success probability is at
/// most `p`, against a fixed σ with smallest eigenvalue `m`.
pub fn stein_gap_bound(p: f64, m: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&p) {
        return param(format!("success probability {p} outside [1/2, 1]"));
    }
    if !(m > 0.0 && m <= 1.0) {
        return param(format!("minimal eigenvalue {m} outside (0, 1]"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let q = 2.0 * p - 1.0;
    Ok(q * (1.0 / m).ln() + 2.0 * p * binary_entropy(q / (2.0 * p))?)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return param(format!("inverse temperature {beta} must be positive"));
    }
    Ok(())
}

fn check_hamiltonian(h: &HermitianOperator, rho: &DensityMatrix) -> Result<()> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    Ok(())
}

/// `F(ρ) = tr[Hρ] − β⁻¹S(ρ)`.
pub fn free_energy(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_hamiltonian(h, rho)?;
    Ok(linops::trace_product(h.entries(), rho.matrix()).re - von_neumann(rho) / beta)
}

fn log_partition(h: &HermitianOperator, beta: f64) -> f64 {
    let lo = h.min_eigenvalue();
    -beta * lo + h.eigenvalues().iter().map(|&x| (-beta * (x - lo)).exp()).sum::<f64>().ln()
}

/// `D(ρ‖ρ_β(H)) = −S(ρ) + β tr[Hρ] + log tr e^{−βH}`.
///
/// Uses `log ρ_β = −βH − log Z` directly, so Gibbs weights below the support
/// threshold at large β do not count as kernel.
pub fn athermality(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_hamiltonian(h, rho)?;
    let energy = linops::trace_product(h.entries(), rho.matrix()).re;
    Ok((-von_neumann(rho) + beta * energy + log_partition(h, beta)).max(0.0))
}

/// `εβ(λ_max − λ_min) + ε log d + (1+ε)h(ε/(1+ε))`.
pub fn athermality_bound(eps: f64, beta: f64, lambda_max: f64, lambda_min: f64, d: usize) -> Result<f64> {
    check_unit(eps, "ε")?;
    check_beta(beta)?;
    if lambda_max < lambda_min || d == 0 {
        return param("need λ_max ≥ λ_min and d ≥ 1");
    }
    Ok(eps * beta * (lambda_max - lambda_min) + eps * (d as f64).ln() + h_plus(eps)?)
}

/// [`athermality_bound`] with the extreme eigenvalues read off `H`.
pub fn athermality_bound_for(eps: f64, beta: f64, h: &HermitianOperator) -> Result<f64> {
    athermality_bound(eps, beta, h.max_eigenvalue(), h.min_eigenvalue(), h.dim())
}

/// `ε(βλ_max + log tr e^{−βH}) + (1+ε)h(ε/(1+ε))`.
pub fn athermality_bound_partition(eps: f64, beta: f64, h: &HermitianOperator) -> Result<f64> {
    check_unit(eps, "ε")?;
    check_beta(beta)?;
    Ok(eps * (beta * h.max_eigenvalue() + log_partition(h, beta)) + h_plus(eps)?)
}

fn tripartite(rho: &DensityMatrix, profile: &DimensionProfile) -> Result<DensityMatrix> {
    if profile.parties() != 3 {
        return param(format!("expected a tripartite profile, got {} parties", profile.parties()));
    }
    rho.clone().with_profile(profile.clone())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// `ρ_AB^{1/2} ρ_B^{−1/2} ρ_BC ρ_B^{−1/2} ρ_AB^{1/2}`, identities implied.
///
/// Inverses are taken on the support, so singular ρ_B falls back to the
/// pseudoinverse.
pub fn petz_recover(rho_abc: &DensityMatrix, profile: &DimensionProfile) -> Result<DensityMatrix> {
    let rho = tripartite(rho_abc, profile)?;
    petz_from_marginals(&rho.partial_trace(&[0, 1])?, &rho.partial_trace(&[1, 2])?)
}

/// Petz reconstruction from bipartite marginals `ρ_AB`, `ρ_BC` sharing B;
/// ρ_B is taken from `ρ_AB`.
pub fn petz_from_marginals(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = |r: &DensityMatrix| -> Result<(usize, usize)> {
        match r.profile() {
            Some(p) if p.parties() == 2 => Ok((p.local(0), p.local(1))),
            _ => param("marginals need bipartite profiles"),
        }
    };
    let (da, db) = dims(rho_ab)?;
    let (db2, dc) = dims(rho_bc)?;
    if db != db2 {
        return Err(Error::DimensionMismatch { expected: db, got: db2 });
    }
    let profile = DimensionProfile::tripartite(da, db, dc);
    let b = rho_ab.partial_trace(&[1])?;
    let ab_half = linops::embed_local(rho_ab.op().power_on_support(0.5, None)?.entries(), &profile, &[0, 1])?;
    let b_inv_half = linops::embed_local(b.op().power_on_support(-0.5, None)?.entries(), &profile, &[1])?;
    let bc_full = linops::embed_local(rho_bc.matrix(), &profile, &[1, 2])?;
    let left = &ab_half * &b_inv_half;
    let out = &left * bc_full * left.adjoint();
    DensityMatrix::new(hermitian_part(&out))?.with_profile(profile)
}

/// Conditional mutual information `I(A:C|B)` with its Petz-recovery sandwich.
#[derive(Debug, Clone, PartialEq)]
pub struct CmiSandwich {
    pub cmi: f64,
    /// `None` when ρ_B or ρ_ABC is singular.
    pub lower: Option<f64>,
    pub upper: f64,
    /// `‖ρ_ABC − Petz(ρ)‖₁`.
    pub recovery_distance: f64,
}

impl CmiSandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower.map_or(true, |l| l - tol <= self.cmi) && self.cmi <= self.upper + tol
    }
}

pub fn cmi_sandwich(rho_abc: &DensityMatrix, profile: &DimensionProfile) -> Result<CmiSandwich> {
    let rho = tripartite(rho_abc, profile)?;
    let recovered = petz_recover(&rho, profile)?;
    let dist = 2.0 * rho.trace_distance(&recovered)?;
    let cmi = cmi_parts(&rho, &[0], &[2], &[1])?;
    let upper = (SQRT_2 * (profile.local(2) as f64).ln() + 1.0) * dist.sqrt();
    let b = rho.partial_trace(&[1])?;
    let lower = if b.is_full_rank() && rho.is_full_rank() {
        let k = (PI / 8.0).powi(4) / (b.inverse_norm().powi(2) * rho.inverse_norm().powi(2));
        Some(k * dist.powi(4))
    } else {
        None
    };
    Ok(CmiSandwich { cmi, lower, upper, recovery_distance: dist })
}

/// `D̂ − D` with two upper bounds on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds {
    pub gap: f64,
    /// `m_σ⁻¹‖ρ − σ‖_∞`.
    pub spectral: f64,
    /// `‖K‖_∞² + 2‖K‖_∞` with `K = [ρ^{1/2}, σ^{−1/2}]`.
    pub commutator: f64,
}

impl GapBounds {
    pub fn best(&self) -> f64 {
        self.spectral.min(self.commutator)
    }
}

pub fn re_bs_gap_bounds(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<GapBounds> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    if !rho.is_full_rank() || !sigma.is_full_rank() {
        return Err(Error::Singular("gap bounds need full-rank states".into()));
    }
    let d = finite(umegaki(rho, sigma), "relative entropy")?;
    let bs = finite(bs_entropy(rho, sigma), "BS-entropy")?;
    let diff = HermitianOperator::new(rho.matrix() - sigma.matrix())?;
    let spectral = diff.op_norm() / sigma.min_eig();
    let r = rho.op().power_on_support(0.5, None)?.into_entries();
    let s = sigma.op().power_on_support(-0.5, None)?.into_entries();
    let k = linops::op_norm_general(&(&r * &s - &s * &r));
    Ok(GapBounds { gap: bs - d, spectral, commutator: k * k + 2.0 * k })
}

/// Relative gap below which eigenvalues of `σ^{−1/2}ρσ^{−1/2}` share an eigenspace.
pub const CLUSTER_GAP: f64 = 1e-8;

/// Commuting pair `(p, q)` with `D(p‖q) = D̂(ρ‖σ)`, written in the eigenbasis of
/// `σ^{−1/2}ρσ^{−1/2}`.
#[derive(Debug, Clone)]
pub struct ReverseTestPair {
    pub p: DensityMatrix,
    pub q: DensityMatrix,
    /// `min_i tr[σP_i]/tr[P_i]`.
    pub min_q_level: f64,
    /// Sizes of the merged eigenspaces.
    pub multiplicities: Vec<usize>,
}

fn cluster(values: &[f64]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        let split = k == values.len() || {
            let (a, b) = (values[k - 1], values[k]);
            (b - a).abs() > CLUSTER_GAP * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        };
        if split {
            groups.push((start, k));
            start = k;
        }
    }
    groups
}

pub fn minimal_reverse_test(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ReverseTestPair> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    if !sigma.is_full_rank() {
        return Err(Error::Singular("reverse test needs a full-rank σ".into()));
    }
    let s_inv_half = sigma.op().power_on_support(-0.5, None)?.into_entries();
    let y = HermitianOperator::new(hermitian_part(&(&s_inv_half * rho.matrix() * &s_inv_half)))?;
    let weights = y.diagonal_in_eigenbasis(sigma.matrix());
    let lambdas = y.eigenvalues();
    let d = rho.dim();
    let mut p = Vec::with_capacity(d);
    let mut q = Vec::with_capacity(d);
    let mut multiplicities = Vec::new();
    let mut min_level = f64::INFINITY;
    for (a, b) in cluster(lambdas) {
        let n = (b - a) as f64;
        let tr_sigma: f64 = weights[a..b].iter().sum();
        let lambda = lambdas[a..b].iter().sum::<f64>() / n;
        let level = tr_sigma / n;
        min_level = min_level.min(level);
        multiplicities.push(b - a);
        for _ in a..b {
            p.push((lambda * level).max(0.0));
            q.push(level);
        }
    }
    let p = diagonal_state(&p)?;
    let q = diagonal_state(&q)?;
    Ok(ReverseTestPair { p, q, min_q_level: min_level, multiplicities })
}

fn diagonal_state(v: &[f64]) -> Result<DensityMatrix> {
    let total: f64 = v.iter().sum();
    let scaled: Vec<f64> = v.iter().map(|x| x / total).collect();
    DensityMatrix::from_operator(HermitianOperator::from_real_diagonal(&scaled))
}

/// Left side and additive error of the weak quasi-factorization inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakQf {
    /// `D(ρ_AB‖σ_AB) − D_A − D_B`.
    pub lhs_deficit: f64,
    pub xi: f64,
    pub eps: f64,
    pub delta: f64,
    pub m_tilde: f64,
}

pub fn weak_qf(rho_ab: &DensityMatrix, sigma_ab: &DensityMatrix, profile: &DimensionProfile) -> Result<WeakQf> {
    if profile.parties() != 2 {
        return param(format!("expected a bipartite profile, got {} parties", profile.parties()));
    }
    let rho = rho_ab.clone().with_profile(profile.clone())?;
    let sigma = sigma_ab.clone().with_profile(profile.clone())?;
    let (ra, rb) = (rho.partial_trace(&[0])?, rho.partial_trace(&[1])?);
    let (sa, sb) = (sigma.partial_trace(&[0])?, sigma.partial_trace(&[1])?);
    let d_ab = umegaki(&rho, &sigma);
    let d_a = umegaki(&ra, &sa);
    let d_b = umegaki(&rb, &sb);
    let mut bad = Vec::new();
    for (i, x) in [d_a, d_b, d_ab].iter().enumerate() {
        if !x.is_finite() {
            bad.push(i);
        }
    }
    if !bad.is_empty() {
        return Err(Error::Kernel(format!("ker σ_X ⊄ ker ρ_X for X in {:?} (0 = A, 1 = B, 2 = AB)", bad)));
    }
    let (d_ab, d_a, d_b) = (d_ab.to_f64(), d_a.to_f64(), d_b.to_f64());
    let cond_a = d_ab - d_b;
    let cond_b = d_ab - d_a;
    let lhs_deficit = d_ab - cond_a - cond_b;
    let eps = rho.trace_distance(&ra.tensor(&rb)?)?.min(1.0);
    let delta = sigma.trace_distance(&sa.tensor(&sb)?)?.min(1.0);
    let m_tilde = 0.5 * (sa.min_eig() * sb.min_eig()).min(sigma.min_eig());
    let xi = if m_tilde > 0.0 { re_joint_bound_simplified(eps, delta, m_tilde)? } else { f64::INFINITY };
    Ok(WeakQf { lhs_deficit, xi, eps, delta, m_tilde })
}

/// Entanglement-type quantities with a closed-form continuity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementKind {
    /// Relative entropy of entanglement.
    Ree,
    /// BS-entropy distance to separable states.
    BsRee,
    /// Rains information of a channel.
    Rains,
    BsRains,
    /// Variational BS-conditional entropy.
    VarBsCe,
}

/// `ε log min{d_A,d_B} + (1+ε)h(ε/(1+ε))` and its `g_{d_AB}` and `2 log d_A` variants.
pub fn entanglement_bounds(kind: EntanglementKind, eps: f64, d_a: usize, d_b: usize) -> Result<f64> {
    check_unit(eps, "ε")?;
    if d_a == 0 || d_b == 0 {
        return param("local dimensions must be positive");
    }
    let log_min = (d_a.min(d_b) as f64).ln();
    let p = eps / (1.0 + eps);
    let g = |d: usize| -> Result<f64> {
        if d < 2 {
            return param(format!("g_d needs d ≥ 2, got {d}"));
        }
        Ok((1.0 + eps) * g_d(p, d)?)
    };
    match kind {
        EntanglementKind::Ree | EntanglementKind::Rains => Ok(eps * log_min + h_plus(eps)?),
        EntanglementKind::BsRee | EntanglementKind::BsRains => Ok(eps * log_min + g(d_a * d_b)?),
        EntanglementKind::VarBsCe => Ok(2.0 * eps * (d_a as f64).ln() + g(d_a * d_b)?),
    }
}
