//! Dense complex linear algebra.
//!
//! All matrices are dense `faer` matrices of `c64`. Exponentials of normal
//! matrices go through a Hermitian eigendecomposition, never through a
//! generic `expm`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub use faer::c64;
use faer::{Mat, MatMut, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::{Error, Result};

/// Relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const I: c64 = c64 { re: 0.0, im: 1.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[inline]
pub(crate) fn cis(theta: f64) -> c64 {
    c64::new(libm::cos(theta), libm::sin(theta))
}

#[inline]
pub(crate) fn cexp(z: c64) -> c64 {
    let r = libm::exp(z.re);
    c64::new(r * libm::cos(z.im), r * libm::sin(z.im))
}

/// Dense square complex matrix.
///
/// Hamiltonian entries carry energy units, times carry inverse energy
/// (hbar = 1).
#[derive(Clone, Debug)]
pub struct OperatorMatrix(Mat<c64>);

impl OperatorMatrix {
    /// Wraps a square matrix.
    pub fn from_mat(m: Mat<c64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows().max(1), found: m.ncols() });
        }
        Ok(Self(m))
    }

    #[inline]
    pub(crate) fn wrap(m: Mat<c64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_rows(rows: &[&[c64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        Self::from_mat(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        Self::from_mat(Mat::from_fn(n, n, |i, j| c64::new(rows[i][j], 0.0)))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        Self(Mat::from_fn(n, n, |i, j| if i == j { c64::new(d[i], 0.0) } else { ZERO }))
    }

    /// Outer product `|a><b|` of two computational basis states.
    pub fn basis_outer(dim: usize, a: usize, b: usize) -> Self {
        Self(Mat::from_fn(dim, dim, |i, j| if i == a && j == b { ONE } else { ZERO }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    #[inline]
    pub fn as_mut(&mut self) -> MatMut<'_, c64> {
        self.0.as_mut()
    }

    #[inline]
    pub fn mat(&self) -> &Mat<c64> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: c64) {
        self.0[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose().to_owned())
    }

    pub fn scale(&self, c: c64) -> Self {
        Self(Mat::from_fn(self.dim(), self.dim(), |i, j| self.0[(i, j)] * c))
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(c64::new(x, 0.0))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        Self(Mat::from_fn(n * m, n * m, |i, j| self.0[(i / m, j / m)] * other.0[(i % m, j % m)]))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.norm_l2()
    }

    /// `||M - M^dag||_F / ||M||_F`, zero for the zero matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.0[(i, j)] - self.0[(j, i)].conj()).norm_sqr();
            }
        }
        libm::sqrt(acc) / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol
    }

    /// Hermitian part `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim();
        Self(Mat::from_fn(n, n, |i, j| (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.norm_max()
    }

    /// Conjugates by a rectangular isometry: `W^dag M W`.
    pub fn compress(&self, w: MatRef<'_, c64>) -> Mat<c64> {
        w.adjoint() * (self.0.as_ref() * w)
    }
}

impl From<OperatorMatrix> for Mat<c64> {
    fn from(m: OperatorMatrix) -> Self {
        m.0
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(&self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&OperatorMatrix> for OperatorMatrix {
    fn sub_assign(&mut self, rhs: &OperatorMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<c64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: c64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

/// Pauli matrices and single-qubit helpers. Basis order is `(|0>, |1>)`.
pub mod pauli {
    use super::*;

    pub fn identity() -> OperatorMatrix {
        OperatorMatrix::identity(2)
    }

    pub fn x() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn y() -> OperatorMatrix {
        OperatorMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]).unwrap()
    }

    pub fn z() -> OperatorMatrix {
        OperatorMatrix::diag_real(&[1.0, -1.0])
    }

    /// `|1><0|`
    pub fn lower() -> OperatorMatrix {
        OperatorMatrix::basis_outer(2, 1, 0)
    }

    /// `|0><1|`
    pub fn raise() -> OperatorMatrix {
        OperatorMatrix::basis_outer(2, 0, 1)
    }
}

/// Largest singular value of an arbitrary (possibly rectangular) matrix.
pub fn spectral_norm(m: MatRef<'_, c64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: MatRef<'_, c64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    // An all-zero input makes some SVD kernels return NaN; short-circuit it.
    if m.norm_max() == 0.0 {
        return vec![0.0; m.nrows().min(m.ncols())];
    }
    match m.singular_values() {
        Ok(s) => s,
        // Fall back to the Hermitian route on the Gram matrix.
        Err(_) => {
            let g = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
            let mut ev: Vec<f64> = g
                .self_adjoint_eigenvalues(Side::Lower)
                .map(|v| v.into_iter().map(|x| libm::sqrt(x.max(0.0))).collect())
                .unwrap_or_default();
            ev.sort_by(|a, b| b.total_cmp(a));
            ev
        }
    }
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &OperatorMatrix) -> f64 {
    spectral_norm(m.as_ref())
}

/// Schatten-1 norm (sum of singular values).
pub fn trace_norm(m: &OperatorMatrix) -> f64 {
    singular_values(m.as_ref()).iter().sum()
}

/// Smallest singular value.
pub fn min_singular_value(m: &OperatorMatrix) -> f64 {
    singular_values(m.as_ref()).last().copied().unwrap_or(0.0)
}

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` is the eigenvector of `eigenvalues[k]`.
    pub basis: OperatorMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `U f(Lambda) U^dag`.
    pub fn map(&self, mut f: impl FnMut(f64) -> c64) -> OperatorMatrix {
        let u = self.basis.as_ref();
        let fl: Vec<c64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, k| u[(i, k)] * fl[k]);
        OperatorMatrix::wrap(&scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> OperatorMatrix {
        self.map(|x| c64::new(x, 0.0))
    }

    /// `e^{-i H t}`.
    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        self.map(|x| cis(-x * t))
    }

    /// `U^dag M U`.
    pub fn to_eigenbasis(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        let u = self.basis.as_ref();
        u.adjoint() * (m * u)
    }

    /// `U M U^dag`.
    pub fn from_eigenbasis(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        let u = self.basis.as_ref();
        u * (m * u.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eig_hermitian(h: &OperatorMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    eig_hermitian_unchecked(h.as_ref())
}

pub(crate) fn eig_hermitian_unchecked(h: MatRef<'_, c64>) -> Result<HermitianEigen> {
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen { eigenvalues: Vec::new(), basis: OperatorMatrix(Mat::zeros(0, 0)) });
    }
    let sym = Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let evd = sym.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Decomposition("Hermitian eigendecomposition"))?;
    let s = evd.S().column_vector();
    let eigenvalues = (0..n).map(|i| s[i].re).collect();
    Ok(HermitianEigen { eigenvalues, basis: OperatorMatrix(evd.U().to_owned()) })
}

/// `e^{iHt} O e^{-iHt}`.
pub fn evolve_conjugate(h: &OperatorMatrix, o: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if h.dim() != o.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: o.dim() });
    }
    Ok(HeisenbergEvolver::new(&eig_hermitian(h)?, o).at(t))
}

/// Heisenberg-picture evolution of one observable under one Hamiltonian.
///
/// The observable is rotated into the eigenbasis once, so every further
/// time costs two matrix products.
#[derive(Clone, Debug)]
pub struct HeisenbergEvolver {
    eigenvalues: Vec<f64>,
    basis: Mat<c64>,
    o_tilde: Mat<c64>,
}

impl HeisenbergEvolver {
    pub fn new(eig: &HermitianEigen, o: &OperatorMatrix) -> Self {
        Self {
            eigenvalues: eig.eigenvalues.clone(),
            basis: eig.basis.mat().clone(),
            o_tilde: eig.to_eigenbasis(o.as_ref()),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The evolved observable in the eigenbasis of the Hamiltonian.
    pub fn eigenbasis_at(&self, t: f64) -> Mat<c64> {
        let phase: Vec<c64> = self.eigenvalues.iter().map(|&x| cis(x * t)).collect();
        Mat::from_fn(self.dim(), self.dim(), |i, j| phase[i] * self.o_tilde[(i, j)] * phase[j].conj())
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        let u = self.basis.as_ref();
        OperatorMatrix::wrap(u * (&self.eigenbasis_at(t) * u.adjoint()))
    }

    /// `W^dag e^{iHt} O e^{-iHt} W` for a rectangular `W`.
    pub fn compressed_at(&self, t: f64, w: MatRef<'_, c64>) -> Mat<c64> {
        let m = self.basis.adjoint() * w;
        m.adjoint() * (&self.eigenbasis_at(t) * &m)
    }
}

/// `e^A` for a normal matrix.
///
/// The eigenvectors come from the Hermitian combination `H + phi K` of the
/// Hermitian part `H` and the anti-Hermitian part `iK`, which share an
/// eigenbasis when `A` is normal.
pub fn exp_normal(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let n = a.dim();
    let adj = a.adjoint();
    let scale = a.frobenius();
    if scale > 0.0 {
        let defect = (&(a * &adj) - &(&adj * a)).frobenius() / (scale * scale);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotNormal { defect });
        }
    } else {
        return Ok(OperatorMatrix::identity(n));
    }
    // Golden-ratio weight keeps accidental degeneracies of H and K apart.
    const PHI: f64 = 1.618_033_988_749_895;
    let comb = Mat::from_fn(n, n, |i, j| {
        let x = a.get(i, j);
        let y = adj.get(i, j);
        (x + y) * 0.5 + (x - y) * c64::new(0.0, -0.5) * PHI
    });
    let eig = eig_hermitian_unchecked(comb.as_ref())?;
    let u = eig.basis.as_ref();
    let diag = u.adjoint() * (a.as_ref() * u);
    let scaled = Mat::from_fn(n, n, |i, k| u[(i, k)] * cexp(diag[(k, k)]));
    Ok(OperatorMatrix::wrap(&scaled * u.adjoint()))
}

/// Solves `A X - X B = Y` for Hermitian `A` (n x n) and `B` (m x m) given by
/// their eigendecompositions; `Y` is n x m.
pub fn solve_sylvester(a: &HermitianEigen, b: &HermitianEigen, y: MatRef<'_, c64>) -> Result<Mat<c64>> {
    if y.nrows() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: y.nrows() });
    }
    if y.ncols() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), found: y.ncols() });
    }
    let mut sep = f64::INFINITY;
    for &ai in &a.eigenvalues {
        for &bj in &b.eigenvalues {
            sep = sep.min((ai - bj).abs());
        }
    }
    let tol = 1e-12 * (a.norm() + b.norm());
    if !(sep > tol) {
        return Err(Error::SpectraOverlap { separation: sep });
    }
    let ua = a.basis.as_ref();
    let ub = b.basis.as_ref();
    let yt = ua.adjoint() * (y * ub);
    let xt = Mat::from_fn(a.dim(), b.dim(), |i, j| yt[(i, j)] / (a.eigenvalues[i] - b.eigenvalues[j]));
    Ok(ua * (&xt * ub.adjoint()))
}

/// Operator-norm estimates for a family of Hermitian operators `C_0 .. C_{k-1}`
/// of dimension `n`, run as `k` independent Lanczos recursions in lockstep.
///
/// `apply(X, Y)` must write `C_j X[:, j]` into `Y[:, j]` for every column.
/// Each recursion uses full reorthogonalization and stops once the residual
/// of the extreme Ritz pair is below `rel_tol` times the Ritz value, which
/// places an exact eigenvalue within that distance.
pub fn lanczos_norms(
    n: usize,
    k: usize,
    max_iter: usize,
    rel_tol: f64,
    seed: u64,
    mut apply: impl FnMut(MatRef<'_, c64>, MatMut<'_, c64>),
) -> Vec<f64> {
    let max_iter = max_iter.min(n).max(1);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut x = Mat::<c64>::from_fn(n, k, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    for j in 0..k {
        let nrm = x.col(j).norm_l2();
        for i in 0..n {
            x[(i, j)] /= nrm;
        }
    }
    let mut bases: Vec<Mat<c64>> = (0..k).map(|_| Mat::zeros(n, max_iter)).collect();
    for (j, q) in bases.iter_mut().enumerate() {
        for i in 0..n {
            q[(i, 0)] = x[(i, j)];
        }
    }
    let mut alphas: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut betas: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut active = vec![true; k];
    let mut estimate = vec![0.0f64; k];
    let mut y = Mat::<c64>::zeros(n, k);

    for it in 0..max_iter {
        if !active.iter().any(|&a| a) {
            break;
        }
        apply(x.as_ref(), y.as_mut());
        for j in 0..k {
            if !active[j] {
                continue;
            }
            let q = bases[j].subcols(0, it + 1);
            let mut w = Mat::<c64>::from_fn(n, 1, |i, _| y[(i, j)]);
            let mut alpha = ZERO;
            for i in 0..n {
                alpha += q[(i, it)].conj() * w[(i, 0)];
            }
            alphas[j].push(alpha.re);
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                let h = q.adjoint() * &w;
                w -= q * &h;
            }
            let beta = w.norm_l2();
            let scale = alphas[j].iter().fold(beta, |m, a| m.max(a.abs()));
            let breakdown = beta == 0.0 || beta <= 1e-13 * scale;
            let check = breakdown || it + 1 == max_iter || (it >= 4 && it % 2 == 0);
            if check {
                let (ritz, last) = tridiagonal_extreme_pair(&alphas[j], &betas[j]);
                estimate[j] = ritz.abs();
                // An eigenvalue of C lies within beta |s_m| of the Ritz value.
                let converged = beta * last.abs() <= rel_tol * ritz.abs().max(f64::MIN_POSITIVE);
                if breakdown || converged || it + 1 == max_iter {
                    active[j] = false;
                    for i in 0..n {
                        x[(i, j)] = ZERO;
                    }
                    continue;
                }
            }
            betas[j].push(beta);
            for i in 0..n {
                let v = w[(i, 0)] / beta;
                bases[j][(i, it + 1)] = v;
                x[(i, j)] = v;
            }
        }
    }
    estimate
}

/// Extreme eigenvalue (largest in absolute value) of the real symmetric
/// tridiagonal matrix with diagonal `a` and off-diagonal `b`, together with
/// the last component of its unit eigenvector.
fn tridiagonal_extreme_pair(a: &[f64], b: &[f64]) -> (f64, f64) {
    let m = a.len();
    if m == 1 {
        return (a[0], 1.0);
    }
    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < m { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    // Number of eigenvalues strictly below x (Sturm sequence).
    let count_below = |x: f64| -> usize {
        let mut cnt = 0;
        let mut q = 1.0f64;
        for i in 0..m {
            q = a[i] - x - if i > 0 { b[i - 1] * b[i - 1] / q } else { 0.0 };
            if q == 0.0 {
                q = f64::EPSILON * scale;
            }
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };
    let bisect = |target: usize| -> f64 {
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if count_below(mid) > target {
                h = mid;
            } else {
                l = mid;
            }
        }
        0.5 * (l + h)
    };
    let min_ev = bisect(0);
    let max_ev = bisect(m - 1);
    let theta = if max_ev.abs() >= min_ev.abs() { max_ev } else { min_ev };
    // Inverse iteration with a slightly shifted pivot-free tridiagonal solve.
    let shift = theta + if theta == max_ev { 1.0 } else { -1.0 } * 1e-13 * scale;
    let mut x = vec![1.0f64; m];
    let mut c = vec![0.0f64; m];
    let mut d = vec![0.0f64; m];
    for _ in 0..3 {
        // Forward sweep.
        let mut piv = a[0] - shift;
        if piv == 0.0 {
            piv = f64::EPSILON * scale;
        }
        c[0] = if m > 1 { b[0] / piv } else { 0.0 };
        d[0] = x[0] / piv;
        for i in 1..m {
            let mut p = a[i] - shift - b[i - 1] * c[i - 1];
            if p == 0.0 {
                p = f64::EPSILON * scale;
            }
            c[i] = if i + 1 < m { b[i] / p } else { 0.0 };
            d[i] = (x[i] - b[i - 1] * d[i - 1]) / p;
        }
        x[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        let nrm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
        if !(nrm.is_finite() && nrm > 0.0) {
            return (theta, 1.0);
        }
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    (theta, x[m - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_hermitian(rng: &mut SplitMix64, n: usize) -> OperatorMatrix {
        let m = Mat::<c64>::from_fn(n, n, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        OperatorMatrix::wrap(Mat::from_fn(n, n, |i, j| m[(i, j)] + m[(j, i)].conj()))
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert!(close(op_norm(&OperatorMatrix::identity(4)), 1.0, 1e-14));
        assert!(close(op_norm(&pauli::x()), 1.0, 1e-14));
        assert!(close(op_norm(&OperatorMatrix::diag_real(&[3.0, -5.0])), 5.0, 1e-14));
        assert_eq!(op_norm(&OperatorMatrix::zeros(3)), 0.0);
        assert!(close(trace_norm(&OperatorMatrix::identity(4)), 4.0, 1e-13));
        assert!(close(trace_norm(&OperatorMatrix::basis_outer(4, 0, 0)), 1.0, 1e-14));
    }

    #[test]
    fn rank_one_projector_difference_has_trace_norm_twice_op_norm() {
        let mut rng = SplitMix64::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 4);
        let p = OperatorMatrix::basis_outer(4, 0, 0);
        let moved = evolve_conjugate(&h, &p, -0.7).unwrap();
        let d = &moved - &p;
        assert!(close(trace_norm(&d), 2.0 * op_norm(&d), 1e-10));
    }

    #[test]
    fn pauli_spectra() {
        let e = eig_hermitian(&pauli::z()).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        assert!(close(e.eigenvalues[0], -1.0, 1e-14) && close(e.eigenvalues[1], 1.0, 1e-14));
        let e = eig_hermitian(&pauli::x()).unwrap();
        assert!(close(e.eigenvalues[0], -1.0, 1e-14) && close(e.eigenvalues[1], 1.0, 1e-14));
        // Eigenvector of -1 is (|0> - |1>)/sqrt2 up to phase.
        let v0 = e.basis.get(0, 0);
        let v1 = e.basis.get(1, 0);
        assert!(close((v0 + v1).norm(), 0.0, 1e-12));
        assert!(close(v0.norm(), core::f64::consts::FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs() {
        let mut rng = SplitMix64::seed_from_u64(11);
        for n in [1, 3, 8, 17] {
            let h = random_hermitian(&mut rng, n);
            let e = eig_hermitian(&h).unwrap();
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let u = &e.basis;
            let gram = &u.adjoint() * u;
            assert!(op_norm(&(&gram - &OperatorMatrix::identity(n))) < 1e-10);
            assert!(op_norm(&(&e.reconstruct() - &h)) < 1e-10 * op_norm(&h));
        }
    }

    #[test]
    fn rabi_rotation() {
        let o = evolve_conjugate(&pauli::z(), &pauli::x(), PI / 2.0).unwrap();
        assert!(op_norm(&(&o + &pauli::x())) < 1e-10);
        let o0 = evolve_conjugate(&pauli::z(), &pauli::x(), 0.0).unwrap();
        assert!(op_norm(&(&o0 - &pauli::x())) < 1e-14);
        let oc = evolve_conjugate(&pauli::z(), &pauli::z(), 3.3).unwrap();
        assert!(op_norm(&(&oc - &pauli::z())) < 1e-13);
    }

    #[test]
    fn exp_normal_cases() {
        let e = exp_normal(&OperatorMatrix::zeros(3)).unwrap();
        assert!(op_norm(&(&e - &OperatorMatrix::identity(3))) < 1e-15);

        let a = pauli::y().scale(c64::new(0.0, PI / 2.0));
        let u = exp_normal(&a).unwrap();
        assert!(op_norm(&(&(&u.adjoint() * &u) - &OperatorMatrix::identity(2))) < 1e-10);
        let rotated = &(&u * &pauli::z()) * &u.adjoint();
        assert!(op_norm(&(&rotated + &pauli::z())) < 1e-10);

        let d = exp_normal(&OperatorMatrix::diag_real(&[1.0, -1.0])).unwrap();
        assert!(close(d.get(0, 0).re, core::f64::consts::E, 1e-13));
        assert!(close(d.get(1, 1).re, 1.0 / core::f64::consts::E, 1e-14));
        assert!(close(d.get(0, 1).norm(), 0.0, 1e-14));
    }

    #[test]
    fn exp_normal_rejects_jordan_block() {
        let m = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(exp_normal(&m), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn sylvester_scalar_cases() {
        let a = eig_hermitian(&OperatorMatrix::diag_real(&[2.0])).unwrap();
        let b = eig_hermitian(&OperatorMatrix::diag_real(&[0.0])).unwrap();
        let y = Mat::from_fn(1, 1, |_, _| ONE);
        let x = solve_sylvester(&a, &b, y.as_ref()).unwrap();
        assert!(close(x[(0, 0)].re, 0.5, 1e-15));

        // 0 * x - x * delta = v  has  x = -v / delta; the iterative series
        // x = -(v/delta) sum_k (0/delta)^k collapses to its first term.
        let delta = 3.0;
        let v = 0.7;
        let a = eig_hermitian(&OperatorMatrix::diag_real(&[0.0])).unwrap();
        let b = eig_hermitian(&OperatorMatrix::diag_real(&[delta])).unwrap();
        let y = Mat::from_fn(1, 1, |_, _| c64::new(v, 0.0));
        let x = solve_sylvester(&a, &b, y.as_ref()).unwrap();
        let series: f64 = (0..20).map(|k| -(v / delta) * libm::pow(0.0 / delta, k as f64)).sum();
        assert!(close(x[(0, 0)].re, series, 1e-15));
    }

    #[test]
    fn sylvester_overlap_is_rejected() {
        let a = eig_hermitian(&OperatorMatrix::diag_real(&[1.0, 2.0])).unwrap();
        let b = eig_hermitian(&OperatorMatrix::diag_real(&[2.0])).unwrap();
        let y = Mat::<c64>::zeros(2, 1);
        assert!(matches!(solve_sylvester(&a, &b, y.as_ref()), Err(Error::SpectraOverlap { .. })));
    }

    #[test]
    fn lanczos_matches_exact_norms() {
        let mut rng = SplitMix64::seed_from_u64(3);
        let n = 60;
        let ops: Vec<OperatorMatrix> = (0..3).map(|_| random_hermitian(&mut rng, n)).collect();
        let est = lanczos_norms(n, 3, n, 1e-13, 1, |x, mut y| {
            for j in 0..3 {
                let col = ops[j].as_ref() * x.col(j);
                for i in 0..n {
                    y[(i, j)] = col[i];
                }
            }
        });
        for j in 0..3 {
            let exact = op_norm(&ops[j]);
            assert!(close(est[j], exact, 1e-9 * exact), "{} vs {}", est[j], exact);
        }
    }

    #[test]
    fn lanczos_zero_operator() {
        let est = lanczos_norms(16, 2, 16, 1e-12, 5, |_, mut y| {
            for j in 0..2 {
                for i in 0..16 {
                    y[(i, j)] = ZERO;
                }
            }
        });
        assert_eq!(est, vec![0.0, 0.0]);
    }
}
