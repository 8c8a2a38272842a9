//! Schrieffer-Wolff transformations for a Hamiltonian with an isolated band.
//!
//! Three generator conventions are supported:
//!
//! * [`SwtVariant::ClosedH0`]: anti-Hermitian `T` with `[H0, T] = V_off`.
//! * [`SwtVariant::ClosedH1`]: anti-Hermitian `T` with `[T, H1] = -V_off`,
//!   where `H1 = H0 + V_diag`.
//! * [`SwtVariant::Open`]: Hermitian `T` with `[T, H0] = i V_off`, used for
//!   the non-Hermitian generator `-H0 + iV` of Lindblad dynamics.
//!
//! The off-block part `T_PQ` is obtained from a Sylvester equation solved in
//! the eigenbases of the two diagonal blocks of the reference Hamiltonian.

pub mod bounds;

use alloc::vec::Vec;

use faer::Mat;

use crate::linalg::{
    self, c64, eig_hermitian, eig_hermitian_unchecked, exp_normal, op_norm, solve_sylvester, spectral_norm,
    HermitianEigen, OperatorMatrix,
};
use crate::{Error, Result};

pub use bounds::*;

/// Orthogonal splitting of the Hilbert space by an eigenvalue window of `H0`.
#[derive(Clone, Debug)]
pub struct BandSplit {
    pub p: OperatorMatrix,
    pub q: OperatorMatrix,
    /// Distance between band and complement eigenvalues.
    pub gap: f64,
    pub window: (f64, f64),
    /// Orthonormal eigenvectors spanning the band (`dim x m`).
    pub band_basis: Mat<c64>,
    /// Orthonormal eigenvectors spanning the complement (`dim x (dim - m)`).
    pub complement_basis: Mat<c64>,
    pub band_eigenvalues: Vec<f64>,
    pub complement_eigenvalues: Vec<f64>,
}

impl BandSplit {
    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn rank(&self) -> usize {
        self.band_eigenvalues.len()
    }

    /// `W_P^dag M W_P`.
    pub fn compress_band(&self, m: &OperatorMatrix) -> Mat<c64> {
        m.compress(self.band_basis.as_ref())
    }

    /// Recomputes the gap from the stored spectra.
    pub fn measured_gap(&self) -> f64 {
        spectral_separation(&self.band_eigenvalues, &self.complement_eigenvalues)
    }
}

fn spectral_separation(a: &[f64], b: &[f64]) -> f64 {
    let mut sep = f64::INFINITY;
    for &x in a {
        for &y in b {
            sep = sep.min((x - y).abs());
        }
    }
    sep
}

/// Splits off the eigenvectors of `H0` whose eigenvalues lie in `window`
/// (closed interval).
pub fn band_split(h0: &OperatorMatrix, window: (f64, f64)) -> Result<BandSplit> {
    let eig = eig_hermitian(h0)?;
    band_split_from_eigen(&eig, window)
}

pub fn band_split_from_eigen(eig: &HermitianEigen, window: (f64, f64)) -> Result<BandSplit> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(Error::InvalidParam(alloc::format!("empty window [{lo}, {hi}]")));
    }
    let n = eig.dim();
    let inside: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] >= lo && eig.eigenvalues[k] <= hi).collect();
    let outside: Vec<usize> = (0..n).filter(|&k| !(eig.eigenvalues[k] >= lo && eig.eigenvalues[k] <= hi)).collect();
    if inside.is_empty() {
        return Err(Error::EmptyBand);
    }
    if outside.is_empty() {
        return Err(Error::NoComplement);
    }
    let u = eig.basis.as_ref();
    let band_basis = Mat::from_fn(n, inside.len(), |i, k| u[(i, inside[k])]);
    let complement_basis = Mat::from_fn(n, outside.len(), |i, k| u[(i, outside[k])]);
    let band_eigenvalues: Vec<f64> = inside.iter().map(|&k| eig.eigenvalues[k]).collect();
    let complement_eigenvalues: Vec<f64> = outside.iter().map(|&k| eig.eigenvalues[k]).collect();
    let gap = spectral_separation(&band_eigenvalues, &complement_eigenvalues);
    if gap < 1e-12 * eig.norm() || gap == 0.0 {
        return Err(Error::GapZero { gap });
    }
    let p = OperatorMatrix::wrap(&band_basis * band_basis.adjoint());
    let q = &OperatorMatrix::identity(n) - &p;
    Ok(BandSplit { p, q, gap, window, band_basis, complement_basis, band_eigenvalues, complement_eigenvalues })
}

/// `(V_diag, V_off)` with `V_off = PVQ + QVP` and `V_diag = V - V_off`.
pub fn block_split(v: &OperatorMatrix, split: &BandSplit) -> (OperatorMatrix, OperatorMatrix) {
    let pvq = &(&split.p * v) * &split.q;
    let qvp = &(&split.q * v) * &split.p;
    let off = &pvq + &qvp;
    let diag = v - &off;
    (diag, off)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwtVariant {
    ClosedH0,
    ClosedH1,
    Open,
}

impl SwtVariant {
    pub fn name(self) -> &'static str {
        match self {
            SwtVariant::ClosedH0 => "closed_H0",
            SwtVariant::ClosedH1 => "closed_H1",
            SwtVariant::Open => "open_hermitian",
        }
    }
}

/// Truncated residual interaction `V'` with its remainder certificate.
#[derive(Clone, Debug)]
pub struct VPrime {
    pub matrix: OperatorMatrix,
    /// Highest order `n` included in the sum.
    pub truncation_order: usize,
    /// Rigorous bound on the norm of the discarded tail.
    pub tail_estimate: f64,
}

/// A Schrieffer-Wolff transform `S = e^T`.
#[derive(Clone, Debug)]
pub struct SwtResult {
    pub variant: SwtVariant,
    pub t: OperatorMatrix,
    pub s: OperatorMatrix,
    /// `H0 + V_diag`.
    pub h1: OperatorMatrix,
    pub v_diag: OperatorMatrix,
    pub v_off: OperatorMatrix,
    /// Block separation of the reference Hamiltonian used in the Sylvester
    /// equation (`H0` or `H1`).
    pub reference_gap: f64,
    pub t_norm: f64,
    /// Norm of the `P T Q` block.
    pub t_pq_norm: f64,
    /// Filled in by [`v_prime`].
    pub v_prime: Option<VPrime>,
}

impl SwtResult {
    /// `S^{-1}`: the adjoint for closed variants, `e^{-T}` for the open one.
    pub fn s_inverse(&self) -> Result<OperatorMatrix> {
        match self.variant {
            SwtVariant::ClosedH0 | SwtVariant::ClosedH1 => Ok(self.s.adjoint()),
            SwtVariant::Open => exp_normal(&(&self.t * -1.0)),
        }
    }
}

/// Builds the generator and the transform.
///
/// `h_ref` is `H0` for [`SwtVariant::ClosedH0`] and [`SwtVariant::Open`], and
/// `H1 = H0 + V_diag` for [`SwtVariant::ClosedH1`]. `split` must come from
/// `H0`.
pub fn swt_generator(
    h_ref: &OperatorMatrix,
    v: &OperatorMatrix,
    split: &BandSplit,
    variant: SwtVariant,
) -> Result<SwtResult> {
    let n = split.dim();
    for m in [h_ref, v] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    let defect = h_ref.hermitian_defect();
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let defect = v.hermitian_defect();
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let (v_diag, v_off) = block_split(v, split);
    if variant == SwtVariant::ClosedH1 {
        let v_norm = op_norm(v);
        if 2.0 * v_norm >= split.gap {
            return Err(Error::GapTooSmall { v_norm, gap: split.gap });
        }
    }
    let wp = split.band_basis.as_ref();
    let wq = split.complement_basis.as_ref();
    let a = eig_hermitian_unchecked(h_ref.compress(wp).as_ref())?;
    let b = eig_hermitian_unchecked(h_ref.compress(wq).as_ref())?;
    let reference_gap = spectral_separation(&a.eigenvalues, &b.eigenvalues);
    let y = wp.adjoint() * (v.as_ref() * wq);
    let x = solve_sylvester(&a, &b, y.as_ref())?;
    let t_pq_norm = spectral_norm(x.as_ref());
    let t_pq = OperatorMatrix::wrap(wp * (&x * wq.adjoint()));
    let t_closed = &t_pq - &t_pq.adjoint();
    let t = match variant {
        SwtVariant::ClosedH0 | SwtVariant::ClosedH1 => t_closed,
        SwtVariant::Open => t_closed.scale(c64::new(0.0, -1.0)),
    };
    let s = exp_normal(&t)?;
    let h1 = match variant {
        SwtVariant::ClosedH1 => h_ref.clone(),
        _ => h_ref + &v_diag,
    };
    let t_norm = op_norm(&t);
    Ok(SwtResult { variant, t, s, h1, v_diag, v_off, reference_gap, t_norm, t_pq_norm, v_prime: None })
}

/// Residual of the defining generator equation.
pub fn generator_residual(res: &SwtResult, h0: &OperatorMatrix) -> f64 {
    match res.variant {
        SwtVariant::ClosedH0 => op_norm(&(&h0.commutator(&res.t) - &res.v_off)),
        SwtVariant::ClosedH1 => op_norm(&(&res.t.commutator(&res.h1) + &res.v_off)),
        SwtVariant::Open => op_norm(&(&res.t.commutator(h0) - &res.v_off.scale(linalg::I))),
    }
}

/// Maximum order of the `V'` series.
pub const MAX_ORDER: usize = 40;

/// Sums the `V'` series of `res` until the rigorous remainder drops below
/// `tol` or `MAX_ORDER` is reached.
///
/// * closed `H0`: `sum_n ad_T^n (V - V_off/(n+1)) / n!`
/// * closed `H1`: `sum_n ad_T^n (n V_off/(n+1)) / n!`
/// * open: `sum_n ad_T^n (iV - iV_off/(n+1)) / n!`
///
/// With `r = 2||T||` every term is bounded by `s r^n / n!`, where `s` is
/// `||V||` (closed `H0`, open) or `||V_off||` (closed `H1`), so the tail
/// after order `n` is at most `s * sum_{k>n} r^k / k!`.
pub fn v_prime(mut res: SwtResult, v: &OperatorMatrix, tol: f64) -> Result<SwtResult> {
    let r = 2.0 * res.t_norm;
    let iv;
    let iv_off;
    let (base, off, s_norm): (&OperatorMatrix, &OperatorMatrix, f64) = match res.variant {
        SwtVariant::ClosedH0 => (v, &res.v_off, op_norm(v)),
        SwtVariant::ClosedH1 => (&res.v_off, &res.v_off, op_norm(&res.v_off)),
        SwtVariant::Open => {
            iv = v.scale(linalg::I);
            iv_off = res.v_off.scale(linalg::I);
            (&iv, &iv_off, op_norm(v))
        }
    };
    let n_dim = v.dim();
    let mut sum = OperatorMatrix::zeros(n_dim);
    // ad_T^n applied separately to the two pieces, since their weights differ per order.
    let mut ad_base = base.clone();
    let mut ad_off = off.clone();
    let mut factorial = 1.0f64;
    let mut prev_norm = f64::INFINITY;
    let mut growth = 0usize;
    let mut order = 0usize;
    let mut tail = remainder(s_norm, r, 0);
    for n in 1..=MAX_ORDER {
        ad_base = res.t.commutator(&ad_base);
        ad_off = res.t.commutator(&ad_off);
        factorial *= n as f64;
        let w = 1.0 / (n as f64 + 1.0);
        let term = match res.variant {
            SwtVariant::ClosedH1 => ad_off.scale_real(n as f64 * w / factorial),
            _ => &ad_base.scale_real(1.0 / factorial) - &ad_off.scale_real(w / factorial),
        };
        let term_norm = term.frobenius();
        sum += &term;
        order = n;
        tail = remainder(s_norm, r, n);
        if n as f64 > r && term_norm > prev_norm && term_norm > tol {
            growth += 1;
            if growth >= 5 {
                return Err(Error::SeriesDiverging { order: n });
            }
        } else {
            growth = 0;
        }
        prev_norm = term_norm;
        if tail <= tol {
            break;
        }
    }
    res.v_prime = Some(VPrime { matrix: sum, truncation_order: order, tail_estimate: tail });
    Ok(res)
}

/// `s * sum_{k>n} r^k / k!`, evaluated without cancellation.
fn remainder(s: f64, r: f64, n: usize) -> f64 {
    if s == 0.0 || r == 0.0 {
        return 0.0;
    }
    let mut term = 1.0f64;
    for k in 1..=n {
        term *= r / k as f64;
    }
    let mut acc = 0.0;
    let mut k = n;
    loop {
        k += 1;
        term *= r / k as f64;
        acc += term;
        if term <= 1e-17 * acc || k > n + 400 {
            break;
        }
    }
    s * acc
}

/// Generator, transform and `V'` in one call. The split is taken from `H0`
/// with the given eigenvalue window.
pub fn swt_full(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    split: &BandSplit,
    variant: SwtVariant,
    tol: f64,
) -> Result<SwtResult> {
    let res = match variant {
        SwtVariant::ClosedH1 => {
            let (v_diag, _) = block_split(v, split);
            swt_generator(&(h0 + &v_diag), v, split, variant)?
        }
        _ => swt_generator(h0, v, split, variant)?,
    };
    v_prime(res, v, tol)
}

/// The conjugated Hamiltonian the `V'` series must reproduce, minus the
/// block-diagonal part: `S H S^-1 - H1` (closed) or
/// `S(-H0 + iV)S^-1 - (-H0 + iV_diag)` (open).
pub fn conjugation_residual(res: &SwtResult, h0: &OperatorMatrix, v: &OperatorMatrix) -> Result<f64> {
    let vp = res.v_prime.as_ref().ok_or_else(|| Error::InvalidParam("V' not computed".into()))?;
    let s_inv = res.s_inverse()?;
    let lhs = match res.variant {
        SwtVariant::ClosedH0 | SwtVariant::ClosedH1 => {
            let h = h0 + v;
            &(&(&res.s * &h) * &s_inv) - &res.h1
        }
        SwtVariant::Open => {
            let k = &(-h0) + &v.scale(linalg::I);
            let k1 = &(-h0) + &res.v_diag.scale(linalg::I);
            &(&(&res.s * &k) * &s_inv) - &k1
        }
    };
    Ok(op_norm(&(&lhs - &vp.matrix)))
}
