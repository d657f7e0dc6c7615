//! Density matrices, seeded randomness and the named state families.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{param, Error, Result};
use crate::linops::{self, c, CMatrix, DimensionProfile, HermitianOperator};

/// Trace tolerance accepted at construction.
pub const TRACE_TOL: f64 = 1e-10;
/// Absolute floor on the negativity tolerance.
pub const PSD_TOL: f64 = 1e-12;

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
    profile: Option<DimensionProfile>,
    min_eig: f64,
    rank: usize,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::from_operator(HermitianOperator::new(entries)?)
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let thr = op.default_threshold().max(PSD_TOL);
        let lo = op.min_eigenvalue();
        if lo < -thr {
            return Err(Error::NotPositive(lo));
        }
        let rank = op.rank(None);
        Ok(Self { min_eig: lo.max(0.0), rank, op, profile: None })
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn normalized(entries: CMatrix) -> Result<Self> {
        let tr = linops::trace(&entries).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(entries / c(tr))
    }

    pub fn with_profile(mut self, profile: DimensionProfile) -> Result<Self> {
        if profile.total() != self.dim() {
            return Err(Error::DimensionMismatch { expected: profile.total(), got: self.dim() });
        }
        self.profile = Some(profile);
        Ok(self)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.entries()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn profile(&self) -> Option<&DimensionProfile> {
        self.profile.as_ref()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.op.eigenvalues()
    }

    /// Smallest eigenvalue, clamped at zero.
    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dim()
    }

    /// Smallest eigenvalue above the support threshold.
    pub fn min_nonzero_eig(&self) -> f64 {
        let thr = self.op.default_threshold();
        self.eigenvalues().iter().copied().find(|&x| x > thr).unwrap_or(0.0)
    }

    pub fn max_eig(&self) -> f64 {
        self.op.max_eigenvalue()
    }

    /// `‖ρ⁻¹‖_∞` on the full space; infinite for singular states.
    pub fn inverse_norm(&self) -> f64 {
        if self.is_full_rank() {
            1.0 / self.eigenvalues()[0]
        } else {
            f64::INFINITY
        }
    }

    fn require_profile(&self) -> Result<&DimensionProfile> {
        self.profile.as_ref().ok_or_else(|| Error::Parameter("state carries no dimension profile".into()))
    }

    /// Reduced state on the kept subsystems; the result carries the restricted profile.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let profile = self.require_profile()?;
        let m = linops::partial_trace(self.matrix(), profile, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        DensityMatrix::new(m)?.with_profile(profile.restrict(&sorted))
    }

    /// `self ⊗ other`; profiles concatenate when both are present.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let m = linops::tensor(self.matrix(), other.matrix());
        let out = DensityMatrix::new(m)?;
        let pa = self.profile.clone().map(|p| p.locals().to_vec()).unwrap_or_else(|| vec![self.dim()]);
        let pb = other.profile.clone().map(|p| p.locals().to_vec()).unwrap_or_else(|| vec![other.dim()]);
        let mut locals = pa;
        locals.extend(pb);
        out.with_profile(DimensionProfile::new(&locals)?)
    }

    /// `p·a + (1 − p)·b`, keeping the profile of `a`.
    pub fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&p) {
            return param(format!("mixing weight {p} outside [0,1]"));
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        let m = a.matrix() * c(p) + b.matrix() * c(1.0 - p);
        let out = DensityMatrix::new(m)?;
        match &a.profile {
            Some(pr) => out.with_profile(pr.clone()),
            None => Ok(out),
        }
    }

    /// `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        linops::trace_distance_half(self.matrix(), other.matrix())
    }

    /// Applies `U · U*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        let m = u * self.matrix() * u.adjoint();
        let out = DensityMatrix::new(m)?;
        match &self.profile {
            Some(pr) => out.with_profile(pr.clone()),
            None => Ok(out),
        }
    }
}

/// A (ρ, σ) pair with its kernel-inclusion flag.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub kernel_ok: bool,
}

impl StatePair {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
        }
        let kernel_ok = linops::kernel_included(sigma.op(), rho.matrix(), 1e-10 * rho.dim() as f64);
        Ok(Self { rho, sigma, kernel_ok })
    }
}

/// Deterministic, splittable random source.
///
/// Each `(seed, label, index)` triple maps to an independent ChaCha20 stream
/// seeded with `SHA-256(seed ‖ label ‖ index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        Self { seed, label: label.into() }
    }

    pub fn rng(&self, index: u64) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update((self.label.len() as u64).to_le_bytes());
        h.update(self.label.as_bytes());
        h.update(index.to_le_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha20Rng::from_seed(key)
    }

    pub fn substream(&self, sub: &str) -> RngStream {
        RngStream { seed: self.seed, label: format!("{}/{}", self.label, sub) }
    }

    pub fn algorithm(&self) -> &'static str {
        "chacha20-sha256"
    }
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Hilbert–Schmidt random state `GG*/tr(GG*)`.
pub fn sample_hs<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * g.adjoint();
    let tr = linops::trace(&w).re;
    w / c(tr)
}

/// Random state with smallest eigenvalue at least `min_eig`.
///
/// Draws a Hilbert–Schmidt state and depolarizes it:
/// `(1 − d·min_eig)·ρ′ + min_eig·I`.
pub fn sample_state<R: Rng + ?Sized>(d: usize, min_eig: f64, rng: &mut R) -> Result<DensityMatrix> {
    if d == 0 {
        return param("dimension must be positive");
    }
    if !(0.0..1.0 / d as f64).contains(&min_eig) {
        return param(format!("min_eig {min_eig} outside [0, 1/{d})"));
    }
    let w = sample_hs(d, rng);
    let mixed = w * c(1.0 - d as f64 * min_eig) + linops::identity(d) * c(min_eig);
    DensityMatrix::new(mixed)
}

/// Random state whose smallest eigenvalue equals `min_eig` exactly.
///
/// Keeps the eigenbasis of a Hilbert–Schmidt draw, pins the lowest level to
/// `min_eig` and spreads the remaining weight over the others above it.
pub fn sample_state_exact_min_eig<R: Rng + ?Sized>(d: usize, min_eig: f64, rng: &mut R) -> Result<DensityMatrix> {
    if d < 2 {
        return param("dimension must be at least 2");
    }
    if !(min_eig > 0.0 && min_eig < 1.0 / d as f64) {
        return param(format!("min_eig {min_eig} outside (0, 1/{d})"));
    }
    let w = HermitianOperator::new(sample_hs(d, rng))?;
    let rest: f64 = w.eigenvalues()[1..].iter().sum();
    let spare = 1.0 - d as f64 * min_eig;
    let mut vals = vec![min_eig; d];
    for k in 1..d {
        vals[k] = min_eig + spare * w.eigenvalues()[k] / rest;
    }
    DensityMatrix::from_operator(HermitianOperator::from_spectrum(&vals, w.eigenvectors()))
}

/// Haar-distributed unitary from the QR-free route: eigenvectors of a
/// Ginibre-Wishart draw with random phases.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let w = sample_hs(d, rng);
    let (_, mut v) = linops::eig_hermitian(&w);
    for j in 0..d {
        let phase: f64 = rng.random::<f64>() * core::f64::consts::TAU;
        let z = Complex64::from_polar(1.0, phase);
        for i in 0..d {
            v[(i, j)] *= z;
        }
    }
    v
}

/// Random Hermitian matrix with Gaussian entries scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> HermitianOperator {
    let g = ginibre(d, d, rng);
    let h = (&g + g.adjoint()) * c(0.5 * scale);
    HermitianOperator::new(h).expect("symmetrized matrix is Hermitian")
}

fn diag_state(vals: &[f64]) -> Result<DensityMatrix> {
    DensityMatrix::from_operator(HermitianOperator::from_real_diagonal(vals))
}

/// States saturating the relative-entropy almost-concavity inequality.
#[derive(Debug, Clone)]
pub struct TightnessFamily {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub sigma1: DensityMatrix,
    pub sigma2: DensityMatrix,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
}

/// `ρ₁ = |0⟩⟨0|`, `ρ₂ = |1⟩⟨1|`, `σ₁ = t|0⟩⟨0| + (1−t)|1⟩⟨1|`, `σ₂` with t and
/// 1−t swapped, padded with zeros up to dimension `d`.
pub fn tightness_family(t: f64, p: f64, d: usize) -> Result<TightnessFamily> {
    if !(t > 0.0 && t < 1.0) {
        return param(format!("t = {t} must lie in (0,1)"));
    }
    if !(0.0..=1.0).contains(&p) {
        return param(format!("p = {p} must lie in [0,1]"));
    }
    if d < 2 {
        return param("dimension must be at least 2");
    }
    let mk = |a: f64, b: f64| {
        let mut v = vec![0.0; d];
        v[0] = a;
        v[1] = b;
        diag_state(&v)
    };
    let rho1 = mk(1.0, 0.0)?;
    let rho2 = mk(0.0, 1.0)?;
    let sigma1 = mk(t, 1.0 - t)?;
    let sigma2 = mk(1.0 - t, t)?;
    let rho = mk(p, 1.0 - p)?;
    let sigma = mk(p * t + (1.0 - p) * (1.0 - t), p * (1.0 - t) + (1.0 - p) * t)?;
    Ok(TightnessFamily { rho1, rho2, sigma1, sigma2, rho, sigma })
}

/// Pair on 2⊗2 whose BS-conditional entropies differ by `log 2` while the
/// trace distance `‖ρ₀ − ρ_ε‖₁ = √ε` vanishes with ε.
pub fn discontinuity_family(eps: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps = {eps} must lie in (0,1)"));
    }
    let prof = DimensionProfile::bipartite(2, 2);
    let k0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0)]));
    let k1 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0)]));
    let (a, b) = ((1.0 - eps).sqrt(), eps.sqrt());
    let ke = CMatrix::from_row_slice(2, 2, &[c(a * a), c(a * b), c(a * b), c(b * b)]);
    let rho0 = linops::tensor(&linops::identity(2), &k0) * c(0.5);
    let rhoe = (linops::tensor(&k0, &k0) + linops::tensor(&k1, &ke)) * c(0.5);
    Ok((DensityMatrix::new(rho0)?.with_profile(prof.clone())?, DensityMatrix::new(rhoe)?.with_profile(prof)?))
}

/// Pure bipartite state with Schmidt coefficients `λ` and its marginals.
#[derive(Debug, Clone)]
pub struct SchmidtState {
    pub state: DensityMatrix,
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
}

/// `|ψ⟩ = Σᵢ √λᵢ |i⟩⊗|i⟩` on `d_A ⊗ d_B` with `d_A = λ.len()`.
pub fn schmidt_pure(lambda: &[f64], d_b: usize) -> Result<SchmidtState> {
    let d_a = lambda.len();
    if d_a == 0 {
        return param("empty Schmidt vector");
    }
    if lambda.iter().any(|&x| x < 0.0) || (lambda.iter().sum::<f64>() - 1.0).abs() > TRACE_TOL {
        return param("Schmidt coefficients must be a probability vector");
    }
    let nonzero: Vec<usize> = (0..d_a).filter(|&i| lambda[i] > 0.0).collect();
    if nonzero.iter().any(|&i| i >= d_b) {
        return Err(Error::DimensionMismatch { expected: nonzero.len(), got: d_b });
    }
    let n = d_a * d_b;
    let mut psi = nalgebra::DVector::from_element(n, c(0.0));
    for &i in &nonzero {
        psi[i * d_b + i] = c(lambda[i].sqrt());
    }
    let state = DensityMatrix::new(&psi * psi.adjoint())?.with_profile(DimensionProfile::bipartite(d_a, d_b))?;
    let rho_a = state.partial_trace(&[0])?;
    let rho_b = state.partial_trace(&[1])?;
    Ok(SchmidtState { state, rho_a, rho_b })
}

/// Gibbs state `e^{−βH}/tr e^{−βH}`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0) {
        return param(format!("inverse temperature {beta} must be positive"));
    }
    let lo = h.min_eigenvalue();
    let w: Vec<f64> = h.eigenvalues().iter().map(|&x| (-beta * (x - lo)).exp()).collect();
    let z: f64 = w.iter().sum();
    let vals: Vec<f64> = w.iter().map(|x| x / z).collect();
    DensityMatrix::from_operator(HermitianOperator::from_spectrum(&vals, h.eigenvectors()))
}

pub fn maximally_mixed(d: usize) -> Result<DensityMatrix> {
    if d == 0 {
        return param("dimension must be positive");
    }
    diag_state(&vec![1.0 / d as f64; d])
}

/// `|ψ⟩⟨ψ|` for a normalized vector.
pub fn pure(v: &[Complex64]) -> Result<DensityMatrix> {
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > TRACE_TOL {
        return param(format!("vector has squared norm {norm2}, expected 1"));
    }
    let psi = nalgebra::DVector::from_column_slice(v);
    DensityMatrix::new(&psi * psi.adjoint())
}

/// Basis state `|k⟩⟨k|` in dimension `d`.
pub fn basis_state(d: usize, k: usize) -> Result<DensityMatrix> {
    if k >= d {
        return param(format!("index {k} out of range for dimension {d}"));
    }
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    diag_state(&v)
}

/// Consistent marginals `(ρ_AB, ρ_BC)` with a shared classical register on B.
///
/// `ρ_AB = Σ_j q_j ρ_A^j ⊗ |j⟩⟨j|` and `ρ_BC = Σ_j q_j |j⟩⟨j| ⊗ ρ_C^j`, both
/// conjugated by one random unitary on B. Feeding them to the Petz map yields
/// an exact quantum Markov chain.
pub fn markov_marginals<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    d_c: usize,
    min_eig: f64,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let q = sample_state(d_b, 0.0, rng)?;
    let mut weights: Vec<f64> = q.eigenvalues().to_vec();
    // keep every q_j away from zero so both marginals stay full rank
    for w in weights.iter_mut() {
        *w = 0.5 * *w + 0.5 / d_b as f64;
    }
    let u = random_unitary(d_b, rng);
    let mut ab = CMatrix::zeros(d_a * d_b, d_a * d_b);
    let mut bc = CMatrix::zeros(d_b * d_c, d_b * d_c);
    for (j, &qj) in weights.iter().enumerate() {
        let ra = sample_state(d_a, min_eig.min(0.5 / d_a as f64), rng)?;
        let rc = sample_state(d_c, min_eig.min(0.5 / d_c as f64), rng)?;
        let pj = basis_state(d_b, j)?;
        ab += linops::tensor(ra.matrix(), pj.matrix()) * c(qj);
        bc += linops::tensor(pj.matrix(), rc.matrix()) * c(qj);
    }
    let ua = linops::tensor(&linops::identity(d_a), &u);
    let uc = linops::tensor(&u, &linops::identity(d_c));
    let ab = DensityMatrix::normalized(&ua * ab * ua.adjoint())?.with_profile(DimensionProfile::bipartite(d_a, d_b))?;
    let bc = DensityMatrix::normalized(&uc * bc * uc.adjoint())?.with_profile(DimensionProfile::bipartite(d_b, d_c))?;
    Ok((ab, bc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        RngStream::new(seed, "statekit-test").rng(0)
    }

    #[test]
    fn near_maximal_mixing_is_nearly_maximally_mixed() {
        let mut r = rng(1);
        let s = sample_state(2, 0.5 - 1e-9, &mut r).unwrap();
        let mm = maximally_mixed(2).unwrap();
        assert!(2.0 * s.trace_distance(&mm).unwrap() < 1e-8);
    }

    #[test]
    fn min_eigenvalue_floor_holds() {
        let mut r = rng(2);
        for _ in 0..1000 {
            let s = sample_state(2, 1e-4, &mut r).unwrap();
            assert!(s.eigenvalues()[0] >= 1e-4 - 1e-15);
        }
    }

    #[test]
    fn zero_floor_is_valid() {
        let s = sample_state(4, 0.0, &mut rng(3)).unwrap();
        assert!((s.op().trace() - 1.0).abs() < 1e-12);
        assert!(s.eigenvalues()[0] >= -1e-12);
    }

    #[test]
    fn floor_out_of_range() {
        assert!(matches!(sample_state(2, 0.5, &mut rng(4)), Err(Error::Parameter(_))));
    }

    #[test]
    fn exact_min_eig_sampler() {
        let mut r = rng(5);
        for &m in &[1e-8, 1e-4, 0.2] {
            let s = sample_state_exact_min_eig(2, m, &mut r).unwrap();
            assert!((s.eigenvalues()[0] - m).abs() < 1e-15 + 1e-9 * m);
        }
    }

    #[test]
    fn floor_is_approached() {
        let mut r = rng(6);
        let m = 1e-4;
        let best = (0..10_000).map(|_| sample_state(2, m, &mut r).unwrap().eigenvalues()[0]).fold(f64::INFINITY, f64::min);
        assert!(best >= m - 1e-15 && best <= 10.0 * m);
    }

    #[test]
    fn rng_streams_are_deterministic_and_distinct() {
        let s = RngStream::new(42, "x");
        let a: u64 = s.rng(3).random();
        let b: u64 = s.rng(3).random();
        let c2: u64 = s.rng(4).random();
        let d: u64 = s.substream("y").rng(3).random();
        assert_eq!(a, b);
        assert_ne!(a, c2);
        assert_ne!(a, d);
    }

    #[test]
    fn tightness_family_rejects_bad_t() {
        assert!(tightness_family(0.0, 0.5, 2).is_err());
        assert!(tightness_family(1.0, 0.5, 2).is_err());
        let f = tightness_family(0.3, 0.4, 3).unwrap();
        assert_eq!(f.rho.dim(), 3);
    }

    #[test]
    fn discontinuity_distance() {
        let (a, b) = discontinuity_family(0.25).unwrap();
        assert!((2.0 * a.trace_distance(&b).unwrap() - 0.5).abs() < 1e-12);
        for k in 1..=6 {
            let e = 10f64.powi(-k);
            let (a, b) = discontinuity_family(e).unwrap();
            assert!((2.0 * a.trace_distance(&b).unwrap() - e.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_marginals_are_diagonal() {
        let s = schmidt_pure(&[0.2, 0.8], 3).unwrap();
        assert!((s.rho_a.matrix()[(0, 0)].re - 0.2).abs() < 1e-15);
        assert!((s.rho_b.matrix()[(1, 1)].re - 0.8).abs() < 1e-15);
        assert!(s.rho_b.matrix()[(2, 2)].norm() < 1e-15);
        assert!(matches!(schmidt_pure(&[0.5, 0.5], 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gibbs_examples() {
        let zero = HermitianOperator::new(CMatrix::zeros(3, 3)).unwrap();
        let g = gibbs_state(&zero, 1.0).unwrap();
        assert!((g.matrix()[(1, 1)].re - 1.0 / 3.0).abs() < 1e-15);
        let (beta, e) = (0.7, 1.3);
        let h = HermitianOperator::from_real_diagonal(&[0.0, e]);
        let g = gibbs_state(&h, beta).unwrap();
        let ratio = g.matrix()[(1, 1)].re / g.matrix()[(0, 0)].re;
        assert!((ratio - (-beta * e).exp()).abs() < 1e-14);
        assert!(g.is_full_rank());
    }

    #[test]
    fn pure_requires_normalization() {
        assert!(pure(&[c(1.0), c(1.0)]).is_err());
        let p = pure(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn tensor_and_partial_trace_roundtrip() {
        let mut r = rng(7);
        let a = sample_state(2, 0.0, &mut r).unwrap();
        let b = sample_state(3, 0.0, &mut r).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = ab.partial_trace(&[0]).unwrap();
        assert!(linops::max_abs(&(back.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn rejects_bad_trace_and_negative() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidTrace(_))));
        let h = HermitianOperator::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::from_operator(h), Err(Error::NotPositive(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let mut r = rng(seed);
            let s = sample_state(da * db, 0.0, &mut r).unwrap().with_profile(DimensionProfile::bipartite(da, db)).unwrap();
            for k in 0..2 {
                let red = s.partial_trace(&[k]).unwrap();
                prop_assert!((red.op().trace() - 1.0).abs() < 1e-12);
                prop_assert!(red.eigenvalues()[0] >= -1e-12);
            }
        }

        #[test]
        fn sampler_respects_floor(seed in any::<u64>(), d in 2usize..6, frac in 0.0f64..0.99) {
            let m = frac / d as f64;
            let s = sample_state(d, m, &mut rng(seed)).unwrap();
            prop_assert!(s.eigenvalues()[0] >= m - 1e-14);
        }

        #[test]
        fn trace_norm_triangle(seed in any::<u64>(), d in prop::sample::select(vec![2usize, 3, 4, 6])) {
            let mut r = rng(seed);
            let a = random_hermitian(d, 1.0, &mut r).into_entries();
            let b = random_hermitian(d, 1.0, &mut r).into_entries();
            let n = |m: CMatrix| HermitianOperator::new(m).unwrap().trace_norm();
            prop_assert!(n(&a + &b) <= n(a.clone()) + n(b.clone()) + 1e-10);
        }

        #[test]
        fn log_tensor_law(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
            let mut r = rng(seed);
            let a = sample_state(da, 0.01, &mut r).unwrap();
            let big = HermitianOperator::new(linops::tensor(a.matrix(), &linops::identity(db))).unwrap();
            let lhs = big.matrix_fn_on_support(|x| c(x.ln()), None).unwrap();
            let la = a.op().matrix_fn_on_support(|x| c(x.ln()), None).unwrap();
            let rhs = linops::tensor(&la, &linops::identity(db));
            prop_assert!(linops::max_abs(&(lhs - rhs)) < 1e-10);
        }

        #[test]
        fn support_commutation(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let s = sample_state(d, 0.0, &mut r).unwrap();
            let mut vals = s.eigenvalues().to_vec();
            vals[0] = 0.0;
            let x = HermitianOperator::from_spectrum(&vals, s.op().eigenvectors());
            let f = x.matrix_fn_on_support(|v| Complex64::new(v, 0.0).powc(Complex64::new(-0.5, 1.7)), None).unwrap();
            let p = x.support_projector(None).matrix;
            let comm = HermitianOperator::new({
                let k = &p * &f - &f * &p;
                // ‖K‖₁ ≤ √d‖K‖₂; bound via the Hermitian part sizes
                let kk = k.adjoint() * &k;
                (&kk + kk.adjoint()) * c(0.5)
            }).unwrap();
            let trace_norm_bound: f64 = comm.eigenvalues().iter().map(|x| x.max(0.0).sqrt()).sum();
            prop_assert!(trace_norm_bound < 1e-9);
        }
    }
}
