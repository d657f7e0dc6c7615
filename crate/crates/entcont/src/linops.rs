//! Dense Hermitian linear algebra.
//!
//! Everything downstream goes through [`HermitianOperator`], which stores the
//! entries together with an ascending spectral decomposition computed once at
//! construction. Matrix functions are evaluated on the *support* of the
//! operator: eigenvalues with `|λ| <= threshold` are dropped, which gives the
//! Moore-Penrose convention for negative powers and logarithms.
//!
//! The default support threshold is `d · λ_max · 1e-12` (absolute cutoff,
//! scale invariant). Results near that cutoff are sensitive to it; callers that
//! care pass an explicit threshold.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative factor of the default support threshold.
pub const RANK_FACTOR: f64 = 1e-12;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `m - m*`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `v diag(w) v*` restricted to the listed columns.
fn spectral_sum(vecs: &CMatrix, cols: &[usize], weights: &[Complex64]) -> CMatrix {
    let n = vecs.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (&k, &w) in cols.iter().zip(weights) {
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..n {
            let vj = vecs[(j, k)].conj() * w;
            for i in 0..n {
                out[(i, j)] += vecs[(i, k)] * vj;
            }
        }
    }
    out
}

/// Ordered list of local dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimensionProfile {
    locals: Vec<usize>,
}

impl DimensionProfile {
    pub fn new(locals: &[usize]) -> Result<Self> {
        if locals.is_empty() || locals.iter().any(|&d| d == 0) {
            return Err(Error::Parameter("local dimensions must be positive".into()));
        }
        Ok(Self { locals: locals.to_vec() })
    }

    pub fn bipartite(da: usize, db: usize) -> Self {
        Self::new(&[da, db]).expect("positive dims")
    }

    pub fn tripartite(da: usize, db: usize, dc: usize) -> Self {
        Self::new(&[da, db, dc]).expect("positive dims")
    }

    pub fn locals(&self) -> &[usize] {
        &self.locals
    }

    pub fn total(&self) -> usize {
        self.locals.iter().product()
    }

    pub fn parties(&self) -> usize {
        self.locals.len()
    }

    pub fn local(&self, i: usize) -> usize {
        self.locals[i]
    }

    /// Profile of the kept subsystems, in order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self { locals: keep.iter().map(|&k| self.locals[k]).collect() }
    }

    pub fn dim_of(&self, parts: &[usize]) -> usize {
        parts.iter().map(|&k| self.locals[k]).product()
    }
}

/// Hermitian matrix with its spectral decomposition (eigenvalues ascending).
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianOperator {
    /// Validates hermiticity, symmetrizes and diagonalizes.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare(entries.nrows(), entries.ncols()));
        }
        let asym = asymmetry(&entries);
        if asym > HERMITIAN_TOL * max_abs(&entries).max(1.0) {
            return Err(Error::NotHermitian(asym));
        }
        let sym = (&entries + entries.adjoint()) * c(0.5);
        let (eigenvalues, eigenvectors) = eig_hermitian(&sym);
        Ok(Self { entries: sym, eigenvalues, eigenvectors })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let entries = CMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i]) } else { c(0.0) });
        Self::new(entries).expect("diagonal matrix is Hermitian")
    }

    /// Builds `V diag(λ) V*` from a spectrum. Pairs are re-sorted ascending.
    pub fn from_spectrum(eigenvalues: &[f64], eigenvectors: &CMatrix) -> Self {
        let n = eigenvectors.nrows();
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let vals: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
        let vecs = CMatrix::from_fn(n, order.len(), |i, j| eigenvectors[(i, order[j])]);
        let cols: Vec<usize> = (0..vals.len()).collect();
        let w: Vec<Complex64> = vals.iter().map(|&x| c(x)).collect();
        let mut entries = spectral_sum(&vecs, &cols, &w);
        let herm = (&entries + entries.adjoint()) * c(0.5);
        entries = herm;
        Self { entries, eigenvalues: vals, eigenvectors: vecs }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are eigenvectors in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty")
    }

    /// `d · max|λ| · 1e-12`.
    pub fn default_threshold(&self) -> f64 {
        let scale = self.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        self.dim() as f64 * scale * RANK_FACTOR
    }

    fn threshold_or_default(&self, threshold: Option<f64>) -> f64 {
        threshold.unwrap_or_else(|| self.default_threshold())
    }

    /// Indices of eigenvalues above the threshold, after rejecting eigenvalues
    /// below `-threshold`.
    fn positive_support(&self, thr: f64) -> Result<Vec<usize>> {
        if self.eigenvalues[0] < -thr {
            return Err(Error::NotPositive(self.eigenvalues[0]));
        }
        Ok((0..self.dim()).filter(|&k| self.eigenvalues[k] > thr).collect())
    }

    /// `Σ f(λ)|v⟩⟨v|` over eigenvalues `λ > threshold`.
    ///
    /// The operator must be positive semidefinite up to the threshold; small
    /// negative eigenvalues are treated as zero and dropped.
    pub fn matrix_fn_on_support<F>(&self, f: F, threshold: Option<f64>) -> Result<CMatrix>
    where
        F: Fn(f64) -> Complex64,
    {
        let thr = self.threshold_or_default(threshold);
        let cols = self.positive_support(thr)?;
        let mut w = Vec::with_capacity(cols.len());
        for &k in &cols {
            let lam = self.eigenvalues[k];
            let v = f(lam);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(lam));
            }
            w.push(v);
        }
        Ok(spectral_sum(&self.eigenvectors, &cols, &w))
    }

    /// Real function on the support, returned as a Hermitian operator that
    /// reuses this eigenbasis.
    pub fn real_fn_on_support<F>(&self, f: F, threshold: Option<f64>) -> Result<HermitianOperator>
    where
        F: Fn(f64) -> f64,
    {
        let thr = self.threshold_or_default(threshold);
        let cols = self.positive_support(thr)?;
        let mut vals = vec![0.0; self.dim()];
        for &k in &cols {
            let lam = self.eigenvalues[k];
            let v = f(lam);
            if !v.is_finite() {
                return Err(Error::NonFinite(lam));
            }
            vals[k] = v;
        }
        Ok(HermitianOperator::from_spectrum(&vals, &self.eigenvectors))
    }

    /// Real function applied to every eigenvalue (e.g. `exp`).
    pub fn real_fn<F>(&self, f: F) -> HermitianOperator
    where
        F: Fn(f64) -> f64,
    {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        HermitianOperator::from_spectrum(&vals, &self.eigenvectors)
    }

    /// Pseudoinverse power `X^a` on the support.
    pub fn power_on_support(&self, a: f64, threshold: Option<f64>) -> Result<HermitianOperator> {
        self.real_fn_on_support(|x| x.powf(a), threshold)
    }

    /// Logarithm on the support.
    pub fn log_on_support(&self, threshold: Option<f64>) -> Result<HermitianOperator> {
        self.real_fn_on_support(|x| x.ln(), threshold)
    }

    pub fn support_projector(&self, threshold: Option<f64>) -> SupportProjector {
        let thr = self.threshold_or_default(threshold);
        let cols: Vec<usize> = (0..self.dim()).filter(|&k| self.eigenvalues[k].abs() > thr).collect();
        let w = vec![c(1.0); cols.len()];
        SupportProjector { matrix: spectral_sum(&self.eigenvectors, &cols, &w), rank: cols.len(), threshold: thr }
    }

    pub fn rank(&self, threshold: Option<f64>) -> usize {
        let thr = self.threshold_or_default(threshold);
        self.eigenvalues.iter().filter(|x| x.abs() > thr).count()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).sum()
    }

    pub fn op_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        trace(&self.entries).re
    }

    /// `([X]₊, [X]₋)` with `X = [X]₊ − [X]₋`, both positive and mutually orthogonal.
    pub fn pos_neg_parts(&self) -> (HermitianOperator, HermitianOperator) {
        let pos: Vec<f64> = self.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
        let neg: Vec<f64> = self.eigenvalues.iter().map(|&x| (-x).max(0.0)).collect();
        (
            HermitianOperator::from_spectrum(&pos, &self.eigenvectors),
            HermitianOperator::from_spectrum(&neg, &self.eigenvectors),
        )
    }

    /// Diagonal of `V* A V` in this eigenbasis, i.e. `⟨v_k|A|v_k⟩`.
    pub fn diagonal_in_eigenbasis(&self, a: &CMatrix) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let vi = self.eigenvectors[(i, k)].conj();
                    for j in 0..n {
                        acc += vi * a[(i, j)] * self.eigenvectors[(j, k)];
                    }
                }
                acc.re
            })
            .collect()
    }

    /// `V* A V`.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }
}

/// Spectrum of a Hermitian matrix, ascending, via nalgebra.
pub fn eig_hermitian(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let e = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Orthogonal projector onto the support of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SupportProjector {
    pub matrix: CMatrix,
    pub rank: usize,
    pub threshold: f64,
}

pub fn trace_norm(x: &HermitianOperator) -> f64 {
    x.trace_norm()
}

pub fn op_norm(x: &HermitianOperator) -> f64 {
    x.op_norm()
}

/// Half trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance_half(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(0.5 * HermitianOperator::new(a - b)?.trace_norm())
}

/// Operator norm of a general (not necessarily Hermitian) matrix.
pub fn op_norm_general(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let (vals, _) = eig_hermitian(&((&g + g.adjoint()) * c(0.5)));
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Partial trace keeping the listed subsystems (in profile order).
pub fn partial_trace(m: &CMatrix, profile: &DimensionProfile, keep: &[usize]) -> Result<CMatrix> {
    let total = profile.total();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch { expected: total, got: m.nrows() });
    }
    let n = profile.parties();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= n) || keep_sorted.len() != keep.len() {
        return Err(Error::Parameter("invalid subsystem selection".into()));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
    let dk = profile.dim_of(&keep_sorted);
    let dt = profile.dim_of(&traced);

    // stride of each subsystem in the flat index
    let mut stride = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * profile.local(k + 1);
    }
    let offsets = |parts: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &p in parts.iter().rev() {
            let d = profile.local(p);
            off += (idx % d) * stride[p];
            idx /= d;
        }
        off
    };
    let keep_off: Vec<usize> = (0..dk).map(|a| offsets(&keep_sorted, a)).collect();
    let tr_off: Vec<usize> = (0..dt).map(|t| offsets(&traced, t)).collect();

    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &tr_off {
                acc += m[(keep_off[a] + t, keep_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// `tr[(I − P_σ) ρ (I − P_σ)] <= threshold`, i.e. `ker σ ⊆ ker ρ` numerically.
pub fn kernel_included(sigma: &HermitianOperator, rho: &CMatrix, threshold: f64) -> bool {
    kernel_leak(sigma, rho) <= threshold
}

/// Mass of `ρ` outside the support of `σ`.
pub fn kernel_leak(sigma: &HermitianOperator, rho: &CMatrix) -> f64 {
    let thr = sigma.default_threshold();
    let diag = sigma.diagonal_in_eigenbasis(rho);
    sigma
        .eigenvalues()
        .iter()
        .zip(diag)
        .filter(|(l, _)| l.abs() <= thr)
        .map(|(_, x)| x)
        .sum::<f64>()
        .max(0.0)
}

/// Embeds an operator acting on subsystem `k` of `profile` as `I ⊗ X ⊗ I`.
pub fn embed_local(x: &CMatrix, profile: &DimensionProfile, parts: &[usize]) -> Result<CMatrix> {
    // parts must be contiguous
    if parts.is_empty() || parts.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Parameter("embedded parts must be contiguous".into()));
    }
    let left = profile.dim_of(&(0..parts[0]).collect::<Vec<_>>());
    let last = *parts.last().expect("non-empty");
    let right = profile.dim_of(&((last + 1)..profile.parties()).collect::<Vec<_>>());
    if x.nrows() != profile.dim_of(parts) {
        return Err(Error::DimensionMismatch { expected: profile.dim_of(parts), got: x.nrows() });
    }
    Ok(identity(left).kronecker(x).kronecker(&identity(right)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        (&g + g.adjoint()) * c(0.5)
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn identity_spectrum() {
        let x = HermitianOperator::new(identity(2)).unwrap();
        assert_eq!(x.eigenvalues(), &[1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let x = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(x.eigenvalues(), &[-1.0, 1.0]);
    }

    #[test]
    fn reconstruction_residual_seed7() {
        let m = random_hermitian(6, 7);
        let x = HermitianOperator::new(m.clone()).unwrap();
        let v = x.eigenvectors();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, x.eigenvalues().iter().map(|&l| c(l))));
        assert!(max_diff(&(v * d * v.adjoint()), &m) < 1e-10);
        assert!(max_diff(&(v.adjoint() * v), &identity(6)) < 1e-10);
        assert!(x.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = c(1.0);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian(a)) => assert!((a - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        let x = HermitianOperator::new(identity(3)).unwrap();
        let l = x.matrix_fn_on_support(|v| c(v.ln()), None).unwrap();
        assert!(max_abs(&l) < 1e-15);
    }

    #[test]
    fn complex_power_at_zero_time() {
        let x = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        let t = 0.0;
        let p = x
            .matrix_fn_on_support(|v| Complex64::new(v, 0.0).powc(Complex64::new(-0.5, t / 2.0)), None)
            .unwrap();
        let s2 = 2f64.sqrt();
        assert!((p[(0, 0)] - c(s2)).norm() < 1e-14);
        assert!((p[(1, 1)] - c(s2)).norm() < 1e-14);
        assert!(p[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn pseudoinverse_convention() {
        let x = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
        let inv = x.matrix_fn_on_support(|v| c(1.0 / v), None).unwrap();
        assert!((inv[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert!(inv[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn non_finite_function_is_reported() {
        let x = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        let err = x.matrix_fn_on_support(|v| if v < 0.5 { c(f64::NAN) } else { c(v) }, None);
        assert_eq!(err.unwrap_err(), Error::NonFinite(0.25));
    }

    #[test]
    fn function_commutes_with_support_projector() {
        let g = random_hermitian(5, 19);
        let psd = &g * &g;
        // kill one direction
        let x = HermitianOperator::new(psd).unwrap();
        let mut vals = x.eigenvalues().to_vec();
        vals[0] = 0.0;
        let x = HermitianOperator::from_spectrum(&vals, x.eigenvectors());
        let f = x.matrix_fn_on_support(|v| Complex64::new(v, 0.0).powc(Complex64::new(-0.5, 0.3)), None).unwrap();
        let p = x.support_projector(None);
        assert_eq!(p.rank, 4);
        let comm = &p.matrix * &f - &f * &p.matrix;
        assert!(max_abs(&comm) < 1e-10);
        assert!(max_diff(&(&p.matrix * &p.matrix), &p.matrix) < 1e-10);
    }

    #[test]
    fn norms() {
        let x = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(x.trace_norm(), 2.0);
        assert_eq!(x.op_norm(), 1.0);
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0)]));
        let b = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0)]));
        assert!((trace_distance_half(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pos_neg_parts_examples() {
        let x = HermitianOperator::from_real_diagonal(&[3.0, -1.0]);
        let (p, n) = x.pos_neg_parts();
        assert!((p.entries()[(0, 0)] - c(3.0)).norm() < 1e-15 && p.entries()[(1, 1)].norm() < 1e-15);
        assert!((n.entries()[(1, 1)] - c(1.0)).norm() < 1e-15 && n.entries()[(0, 0)].norm() < 1e-15);

        let m = random_hermitian(4, 11);
        let x = HermitianOperator::new(m.clone()).unwrap();
        let (p, n) = x.pos_neg_parts();
        let resid = HermitianOperator::new(p.entries() - n.entries() - &m).unwrap();
        assert!(resid.trace_norm() < 1e-10);
        assert!(max_abs(&(p.entries() * n.entries())) < 1e-10);
        assert!(p.min_eigenvalue() >= -1e-12 && n.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = HermitianOperator::new(random_hermitian(2, 1)).unwrap().real_fn(|x| x.exp()).into_entries();
        let b = HermitianOperator::new(random_hermitian(3, 2)).unwrap().real_fn(|x| x.exp()).into_entries();
        let a = &a / trace(&a);
        let b = &b / trace(&b);
        let prof = DimensionProfile::bipartite(2, 3);
        let ab = tensor(&a, &b);
        assert!(max_diff(&partial_trace(&ab, &prof, &[0]).unwrap(), &a) < 1e-12);
        assert!(max_diff(&partial_trace(&ab, &prof, &[1]).unwrap(), &b) < 1e-12);

        let s = 0.5f64.sqrt();
        let v = nalgebra::DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let bell = &v * v.adjoint();
        let prof = DimensionProfile::bipartite(2, 2);
        for k in 0..2 {
            let r = partial_trace(&bell, &prof, &[k]).unwrap();
            assert!(max_diff(&r, &(identity(2) * c(0.5))) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_composition_seed3() {
        let g = random_hermitian(12, 3);
        let r = &g * &g;
        let r = &r / trace(&r);
        let prof = DimensionProfile::tripartite(2, 3, 2);
        let ab = partial_trace(&r, &prof, &[0, 1]).unwrap();
        let a1 = partial_trace(&ab, &DimensionProfile::bipartite(2, 3), &[0]).unwrap();
        let a2 = partial_trace(&r, &prof, &[0]).unwrap();
        assert!(max_diff(&a1, &a2) < 1e-12);
        assert!((trace(&a2).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_profile_mismatch() {
        let prof = DimensionProfile::bipartite(2, 2);
        assert!(matches!(partial_trace(&identity(3), &prof, &[0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kernel_inclusion_examples() {
        let full = HermitianOperator::from_real_diagonal(&[0.3, 0.7]);
        let p0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let p1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert!(kernel_included(&full, p1.entries(), 1e-10));
        assert!(!kernel_included(&p0, p1.entries(), 1e-10));
        assert!(kernel_included(&p0, p0.entries(), 1e-10));
    }

    #[test]
    fn embed_matches_kron() {
        let prof = DimensionProfile::tripartite(2, 3, 2);
        let x = random_hermitian(3, 5);
        let e = embed_local(&x, &prof, &[1]).unwrap();
        let k = identity(2).kronecker(&x).kronecker(&identity(2));
        assert!(max_diff(&e, &k) < 1e-15);
    }
}
