//! Entropic functionals: von Neumann entropy, Umegaki relative entropy,
//! BS-entropy and the conditional and mutual quantities derived from them.
//!
//! All logarithms are natural. Divergences return [`ExtendedReal`] so the
//! `+∞` branch (support of ρ not contained in the support of σ) is a value,
//! not an error. The second argument of the operator-level functions may be any
//! positive semidefinite operator, e.g. `1_A ⊗ ρ_B`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{param, Error, Result};
use crate::linops::{self, c, CMatrix, DimensionProfile, HermitianOperator};
use crate::statekit::{self, DensityMatrix};

/// Relative tolerance of the kernel-inclusion test (scaled by the dimension).
pub const KERNEL_TOL: f64 = 1e-10;

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::PosInf => None,
        }
    }

    /// Finite value or an [`Error::Infinite`] naming `what`.
    pub fn expect_finite(self, what: &str) -> Result<f64> {
        self.finite().ok_or_else(|| Error::Infinite(what.into()))
    }

    /// `f64` view with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// `self − other`; `+∞ − +∞` is an error, `finite − +∞` has no
    /// representation either.
    pub fn checked_sub(self, other: ExtendedReal) -> Result<ExtendedReal> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => Ok(ExtendedReal::Finite(a - b)),
            (ExtendedReal::PosInf, ExtendedReal::Finite(_)) => Ok(ExtendedReal::PosInf),
            (ExtendedReal::PosInf, ExtendedReal::PosInf) => Err(Error::InfMinusInf),
            (ExtendedReal::Finite(_), ExtendedReal::PosInf) => Err(Error::Infinite("subtrahend".into())),
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInf,
        }
    }
}

impl Add<f64> for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: f64) -> ExtendedReal {
        self + ExtendedReal::Finite(rhs)
    }
}

impl Neg for ExtendedReal {
    type Output = Result<f64>;
    fn neg(self) -> Result<f64> {
        self.finite().map(|x| -x).ok_or(Error::Infinite("negated divergence".into()))
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "+inf"),
        }
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `S(ρ) = −tr ρ log ρ` with `0 log 0 = 0`.
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(rho.op())
}

fn spectrum_entropy(op: &HermitianOperator) -> f64 {
    let thr = op.default_threshold();
    -op.eigenvalues().iter().filter(|&&x| x > thr).map(|&x| xlogx(x)).sum::<f64>()
}

fn kernel_threshold(d: usize) -> f64 {
    KERNEL_TOL * d as f64
}

/// `tr[ρ log σ]` on the support of σ.
fn trace_rho_log_sigma(rho: &CMatrix, sigma: &HermitianOperator) -> f64 {
    let thr = sigma.default_threshold();
    let diag = sigma.diagonal_in_eigenbasis(rho);
    sigma.eigenvalues().iter().zip(diag).filter(|(l, _)| **l > thr).map(|(l, w)| w * l.ln()).sum()
}

/// Umegaki relative entropy with an arbitrary positive second argument.
pub fn umegaki_operator(rho: &HermitianOperator, sigma: &HermitianOperator) -> ExtendedReal {
    if !linops::kernel_included(sigma, rho.entries(), kernel_threshold(rho.dim())) {
        return ExtendedReal::PosInf;
    }
    let neg_s = -spectrum_entropy(rho);
    ExtendedReal::Finite(neg_s - trace_rho_log_sigma(rho.entries(), sigma))
}

/// `D(ρ‖σ) = tr[ρ(log ρ − log σ)]`, `+∞` unless `ker σ ⊆ ker ρ`.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> ExtendedReal {
    umegaki_operator(rho.op(), sigma.op())
}

/// BS-entropy via `tr[σ Y log Y]` with `Y = σ^{-1/2} ρ σ^{-1/2}`.
///
/// Requires σ invertible.
pub fn bs_entropy_via_sigma(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let thr = sigma.default_threshold();
    if sigma.min_eigenvalue() <= thr {
        return Err(Error::Singular("second argument of the BS-entropy".into()));
    }
    let s_inv_half = sigma.power_on_support(-0.5, None)?.into_entries();
    let y = HermitianOperator::new(&s_inv_half * rho.entries() * &s_inv_half)?;
    let weights = y.diagonal_in_eigenbasis(sigma.entries());
    let ythr = y.default_threshold();
    let mut acc = 0.0;
    for (&mu, w) in y.eigenvalues().iter().zip(weights) {
        if mu > ythr {
            acc += w * mu * mu.ln();
        }
    }
    Ok(acc)
}

/// BS-entropy via `tr[ρ log(ρ^{1/2} σ⁺ ρ^{1/2})]`, pseudoinverse on the support.
pub fn bs_entropy_definitional(rho: &HermitianOperator, sigma: &HermitianOperator) -> ExtendedReal {
    if !linops::kernel_included(sigma, rho.entries(), kernel_threshold(rho.dim())) {
        return ExtendedReal::PosInf;
    }
    let rho_half = match rho.power_on_support(0.5, None) {
        Ok(x) => x.into_entries(),
        Err(_) => return ExtendedReal::PosInf,
    };
    let s_inv = match sigma.power_on_support(-1.0, None) {
        Ok(x) => x.into_entries(),
        Err(_) => return ExtendedReal::PosInf,
    };
    let x = match HermitianOperator::new(&rho_half * s_inv * &rho_half) {
        Ok(x) => x,
        Err(_) => return ExtendedReal::PosInf,
    };
    ExtendedReal::Finite(trace_rho_log_sigma(rho.entries(), &x))
}

/// BS-entropy with an arbitrary positive second argument. Uses the σ-form when
/// σ is invertible and the definitional form otherwise.
pub fn bs_entropy_operator(rho: &HermitianOperator, sigma: &HermitianOperator) -> ExtendedReal {
    if sigma.min_eigenvalue() > sigma.default_threshold() {
        match bs_entropy_via_sigma(rho, sigma) {
            Ok(v) => ExtendedReal::Finite(v),
            Err(_) => bs_entropy_definitional(rho, sigma),
        }
    } else {
        bs_entropy_definitional(rho, sigma)
    }
}

/// `D̂(ρ‖σ) = tr[ρ log(ρ^{1/2} σ⁻¹ ρ^{1/2})]`.
pub fn bs_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> ExtendedReal {
    bs_entropy_operator(rho.op(), sigma.op())
}

fn profile_of(rho: &DensityMatrix) -> Result<&DimensionProfile> {
    rho.profile().ok_or_else(|| Error::Parameter("state needs a dimension profile".into()))
}

/// Reduced state on `parts`, returning the state itself when nothing is traced.
pub fn reduce(rho: &DensityMatrix, parts: &[usize]) -> Result<DensityMatrix> {
    let prof = profile_of(rho)?;
    if parts.len() == prof.parties() {
        return Ok(rho.clone());
    }
    rho.partial_trace(parts)
}

/// Groups consecutive subsystems into a bipartition `first | rest`.
pub fn bipartition(rho: &DensityMatrix, first: &[usize], second: &[usize]) -> Result<DensityMatrix> {
    let prof = profile_of(rho)?;
    let mut all: Vec<usize> = first.iter().chain(second).copied().collect();
    let sorted = {
        let mut s = all.clone();
        s.sort_unstable();
        s
    };
    if all != sorted || first.is_empty() || second.is_empty() {
        return param("bipartition parts must be non-empty and ordered");
    }
    let reduced = reduce(rho, &all)?;
    all.clear();
    let da = prof.dim_of(first);
    let db = prof.dim_of(second);
    DensityMatrix::new(reduced.matrix().clone())?.with_profile(DimensionProfile::bipartite(da, db))
}

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let prof = profile_of(rho)?;
    if prof.parties() != 2 {
        return param(format!("expected a bipartite profile, got {} parties", prof.parties()));
    }
    Ok((prof.local(0), prof.local(1)))
}

/// `1_A ⊗ ρ_B` as a Hermitian operator.
pub fn identity_tensor_marginal(rho_ab: &DensityMatrix) -> Result<HermitianOperator> {
    let (da, _) = bipartite_dims(rho_ab)?;
    let rb = rho_ab.partial_trace(&[1])?;
    HermitianOperator::new(linops::tensor(&linops::identity(da), rb.matrix()))
}

/// `H(A|B) = S(ρ_AB) − S(ρ_B)`.
pub fn conditional_entropy(rho_ab: &DensityMatrix) -> Result<f64> {
    bipartite_dims(rho_ab)?;
    Ok(von_neumann(rho_ab) - von_neumann(&rho_ab.partial_trace(&[1])?))
}

/// `H(A|B) = −D(ρ_AB‖1_A ⊗ ρ_B)`.
pub fn conditional_entropy_divergence(rho_ab: &DensityMatrix) -> Result<f64> {
    let s = identity_tensor_marginal(rho_ab)?;
    -umegaki_operator(rho_ab.op(), &s)
}

/// `Ĥ(A|B) = −D̂(ρ_AB‖1_A ⊗ ρ_B)`.
///
/// The support of `ρ_AB` always lies inside that of `1_A ⊗ ρ_B`, so the value
/// is finite.
pub fn bs_conditional_entropy(rho_ab: &DensityMatrix) -> Result<f64> {
    let s = identity_tensor_marginal(rho_ab)?;
    -bs_entropy_operator(rho_ab.op(), &s)
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_info(rho_ab: &DensityMatrix) -> Result<f64> {
    bipartite_dims(rho_ab)?;
    let a = rho_ab.partial_trace(&[0])?;
    let b = rho_ab.partial_trace(&[1])?;
    Ok(von_neumann(&a) + von_neumann(&b) - von_neumann(rho_ab))
}

/// `Î(A:B) = D̂(ρ_AB‖ρ_A ⊗ ρ_B)`.
pub fn bs_mutual_info(rho_ab: &DensityMatrix) -> Result<ExtendedReal> {
    bipartite_dims(rho_ab)?;
    let a = rho_ab.partial_trace(&[0])?;
    let b = rho_ab.partial_trace(&[1])?;
    let prod = HermitianOperator::new(linops::tensor(a.matrix(), b.matrix()))?;
    Ok(bs_entropy_operator(rho_ab.op(), &prod))
}

/// `I(X:Y|Z) = S(XZ) + S(YZ) − S(Z) − S(XYZ)` for disjoint subsystem sets.
pub fn cmi_parts(rho: &DensityMatrix, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    let join = |a: &[usize], b: &[usize]| {
        let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
        v.sort_unstable();
        v
    };
    let xz = join(x, z);
    let yz = join(y, z);
    let xyz = join(&xz, y);
    let s = |parts: &[usize]| -> Result<f64> {
        if parts.is_empty() {
            Ok(0.0)
        } else {
            Ok(von_neumann(&reduce(rho, parts)?))
        }
    };
    Ok(s(&xz)? + s(&yz)? - s(z)? - s(&xyz)?)
}

fn tripartite(rho: &DensityMatrix) -> Result<()> {
    let prof = profile_of(rho)?;
    if prof.parties() != 3 {
        return param(format!("expected a tripartite profile, got {} parties", prof.parties()));
    }
    Ok(())
}

/// `I(A:B|C) = H(A|C) − H(A|BC)`.
pub fn cmi(rho_abc: &DensityMatrix) -> Result<f64> {
    tripartite(rho_abc)?;
    cmi_parts(rho_abc, &[0], &[1], &[2])
}

/// One-sided BS-CMI `Ĥ(A|C) − Ĥ(A|BC)`.
pub fn bs_cmi_os(rho_abc: &DensityMatrix) -> Result<ExtendedReal> {
    tripartite(rho_abc)?;
    let ac = bipartition(rho_abc, &[0], &[2])?;
    let a_bc = bipartition(rho_abc, &[0], &[1, 2])?;
    Ok(ExtendedReal::Finite(bs_conditional_entropy(&ac)? - bs_conditional_entropy(&a_bc)?))
}

/// Two-sided BS-CMI `Î(A:BC) − Î(A:C)`.
pub fn bs_cmi_ts(rho_abc: &DensityMatrix) -> Result<ExtendedReal> {
    tripartite(rho_abc)?;
    let a_bc = bipartition(rho_abc, &[0], &[1, 2])?;
    let ac = bipartition(rho_abc, &[0], &[2])?;
    bs_mutual_info(&a_bc)?.checked_sub(bs_mutual_info(&ac)?)
}

/// `−D̂(ρ_AB‖1_A ⊗ σ_B)` for a candidate `σ_B`.
pub fn variational_candidate(rho_ab: &DensityMatrix, sigma_b: &DensityMatrix) -> Result<f64> {
    let (da, db) = bipartite_dims(rho_ab)?;
    if sigma_b.dim() != db {
        return Err(Error::DimensionMismatch { expected: db, got: sigma_b.dim() });
    }
    let s = HermitianOperator::new(linops::tensor(&linops::identity(da), sigma_b.matrix()))?;
    -bs_entropy_operator(rho_ab.op(), &s)
}

/// Result of the variational BS-conditional entropy search.
#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub value: f64,
    pub sigma_b: DensityMatrix,
    /// `false` when the simplex search hit its iteration cap; `value` is then
    /// only a lower bound on the supremum.
    pub converged: bool,
}

fn lower_triangular_from(params: &[f64], d: usize) -> CMatrix {
    let mut l = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        l[(i, i)] = c(params[k]);
        k += 1;
        for j in 0..i {
            l[(i, j)] = Complex64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
    l
}

fn params_from_lower(l: &CMatrix) -> Vec<f64> {
    let d = l.nrows();
    let mut p = Vec::with_capacity(d * d);
    for i in 0..d {
        p.push(l[(i, i)].re);
        for j in 0..i {
            p.push(l[(i, j)].re);
            p.push(l[(i, j)].im);
        }
    }
    p
}

fn state_from_params(params: &[f64], d: usize) -> Option<DensityMatrix> {
    let l = lower_triangular_from(params, d);
    let w = &l * l.adjoint();
    let tr = linops::trace(&w).re;
    if !(tr > 0.0) || !tr.is_finite() {
        return None;
    }
    DensityMatrix::new(w / c(tr)).ok()
}

/// Derivative-free simplex minimization. Returns `(argmin, min, converged)`.
pub fn nelder_mead<F>(f: F, start: &[f64], step: f64, tol: f64, max_iter: usize) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += if v[i].abs() > 1e-8 { step * v[i].abs().max(0.1) } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let (alpha, gamma, rho_c, sigma_s) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= tol {
            converged = true;
            break;
        }
        let mut centroid = alloc::vec![0.0; n];
        for v in &simplex[..n] {
            for (cj, vj) in centroid.iter_mut().zip(v) {
                *cj += vj / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(cj, wj)| cj + t * (cj - wj)).collect() };
        let xr = along(alpha);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(gamma);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let x = along(rho_c);
                let fx = f(&x);
                (x, fx)
            } else {
                let x = along(-rho_c);
                let fx = f(&x);
                (x, fx)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    let v: Vec<f64> = best.iter().zip(&simplex[i]).map(|(b, x)| b + sigma_s * (x - b)).collect();
                    values[i] = f(&v);
                    simplex[i] = v;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best], converged)
}

/// `sup_{σ_B} −D̂(ρ_AB‖1_A ⊗ σ_B)` by simplex search over `σ_B = LL*/tr(LL*)`.
///
/// One start at `σ_B = ρ_B` plus `restarts` random starts.
pub fn variational_bs_conditional<R: Rng + ?Sized>(
    rho_ab: &DensityMatrix,
    restarts: usize,
    tol: f64,
    rng: &mut R,
) -> Result<VariationalResult> {
    if restarts == 0 {
        return param("restarts must be at least 1");
    }
    let (_, db) = bipartite_dims(rho_ab)?;
    let objective = |p: &[f64]| -> f64 {
        match state_from_params(p, db) {
            Some(s) => match variational_candidate(rho_ab, &s) {
                Ok(v) if v.is_finite() => -v,
                _ => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    };
    let rb = rho_ab.partial_trace(&[1])?;
    let reg = rb.matrix() + linops::identity(db) * c(1e-12);
    let chol = nalgebra::Cholesky::new(reg).ok_or_else(|| Error::Singular("marginal Cholesky".into()))?;
    let mut starts = alloc::vec![params_from_lower(&chol.l())];
    for _ in 0..restarts {
        let g: DMatrix<Complex64> = statekit::ginibre(db, db, rng);
        let mut l = CMatrix::zeros(db, db);
        for i in 0..db {
            l[(i, i)] = c(g[(i, i)].norm() + 0.1);
            for j in 0..i {
                l[(i, j)] = g[(i, j)];
            }
        }
        starts.push(params_from_lower(&l));
    }
    let max_iter = 400 * db * db;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for s in &starts {
        let (x, fx, ok) = nelder_mead(objective, s, 0.2, tol * 1e-2, max_iter);
        let better = match &best {
            Some((_, fb, _)) => fx < *fb,
            None => true,
        };
        if better {
            best = Some((x, fx, ok));
        }
    }
    let (x, fx, ok) = best.expect("at least one start");
    let sigma_b = state_from_params(&x, db).ok_or_else(|| Error::Degenerate("optimizer left the state manifold".into()))?;
    Ok(VariationalResult { value: -fx, sigma_b, converged: ok })
}

/// Tolerances attached to an [`EntropyReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportTolerances {
    pub kernel: f64,
    pub rank_factor: f64,
}

/// A computed quantity with provenance.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub label: String,
    pub value: ExtendedReal,
    /// Hex SHA-256 of the input matrices' IEEE-754 bytes.
    pub inputs_digest: String,
    pub tolerances: ReportTolerances,
    pub warning: Option<String>,
}

/// SHA-256 of the little-endian bytes of every entry (row-major, re then im).
pub fn digest_states(states: &[&DensityMatrix]) -> String {
    let mut h = Sha256::new();
    for s in states {
        let m = s.matrix();
        h.update((m.nrows() as u64).to_le_bytes());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                h.update(m[(i, j)].re.to_le_bytes());
                h.update(m[(i, j)].im.to_le_bytes());
            }
        }
    }
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out.iter() {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Which divergence a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divergence {
    Umegaki,
    Bs,
}

/// Evaluates a divergence and flags inputs whose kernel leak sits within two
/// decades of the `+∞` threshold.
pub fn divergence_report(kind: Divergence, rho: &DensityMatrix, sigma: &DensityMatrix) -> EntropyReport {
    let value = match kind {
        Divergence::Umegaki => umegaki(rho, sigma),
        Divergence::Bs => bs_entropy(rho, sigma),
    };
    let thr = kernel_threshold(rho.dim());
    let leak = linops::kernel_leak(sigma.op(), rho.matrix());
    let warning = if leak > thr * 1e-2 && leak < thr * 1e2 {
        Some(format!("kernel leak {leak:e} is close to the threshold {thr:e}"))
    } else if sigma.min_nonzero_eig() < 1e3 * sigma.op().default_threshold() {
        Some(format!("second argument nearly singular (min nonzero eigenvalue {:e})", sigma.min_nonzero_eig()))
    } else {
        None
    };
    EntropyReport {
        label: match kind {
            Divergence::Umegaki => "umegaki".into(),
            Divergence::Bs => "bs_entropy".into(),
        },
        value,
        inputs_digest: digest_states(&[rho, sigma]),
        tolerances: ReportTolerances { kernel: thr, rank_factor: linops::RANK_FACTOR },
        warning,
    }
}
