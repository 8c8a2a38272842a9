//! Exact versus constrained dynamics of closed systems.
//!
//! The error of the constrained approximation is the worst case over states
//! in the band, i.e. the operator norm of the band-compressed difference
//! between the two Heisenberg-picture observables. No state sampling is
//! involved.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::lattice::{pauli_y_site, InteractionSum, LocalTerm, SupportSet};
use crate::linalg::{
    self, c64, eig_hermitian, eig_hermitian_unchecked, lanczos_norms, op_norm, spectral_norm, HeisenbergEvolver,
    OperatorMatrix,
};
use crate::swt::{
    band_split_from_eigen, bound_asymptotic, bound_b1, bound_b2, bound_single_state, conjugation_residual,
    generator_residual, swt_full, swt_generator, BandSplit, BoundParams, LiebRobinsonParams, SwtVariant,
};
use crate::{Error, Result};

/// One bound evaluated on the time grid of an [`ErrorTrace`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundColumn {
    pub name: &'static str,
    pub values: Vec<f64>,
    /// `false` for large-gap approximations that may be exceeded.
    pub rigorous: bool,
}

/// `epsilon(t)` on a time grid, with bound columns and scenario metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTrace {
    pub times: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub bounds: Vec<BoundColumn>,
    pub metadata: Vec<(String, f64)>,
}

impl ErrorTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn bound(&self, name: &str) -> Option<&BoundColumn> {
        self.bounds.iter().find(|b| b.name == name)
    }

    pub fn meta(&self, key: &str) -> Option<f64> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn max_epsilon(&self) -> f64 {
        self.epsilon.iter().fold(0.0, |m, &e| m.max(e))
    }

    /// Number of samples where `epsilon > bound + slack`.
    pub fn violations(&self, name: &str, slack: f64) -> Option<usize> {
        let b = self.bound(name)?;
        Some(self.epsilon.iter().zip(&b.values).filter(|(e, b)| **e > **b + slack).count())
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParam("times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParam("times must be ascending".into()));
    }
    Ok(())
}

/// Rescales `o` to unit operator norm and returns the factor.
pub(crate) fn normalize(o: &OperatorMatrix) -> Result<(OperatorMatrix, f64)> {
    let scale = op_norm(o);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::InvalidParam("observable must have a finite nonzero norm".into()));
    }
    Ok((o.scale_real(1.0 / scale), scale))
}

fn check_dims(n: usize, ms: &[&OperatorMatrix]) -> Result<()> {
    for m in ms {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    Ok(())
}

/// `epsilon(t) = ||P (e^{iHt} O e^{-iHt} - e^{iH_P t} O e^{-iH_P t}) P||` with
/// `H = H0 + V` and `H_P = PHP`.
///
/// `O` is normalized on entry; the factor is stored as `observable_scale`.
/// Bound columns: `b1` always, `b2` when `2||V|| < Delta0`, and the
/// non-rigorous `asymptotic` form.
pub fn epsilon_closed(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    split: &BandSplit,
    o: &OperatorMatrix,
    times: &[f64],
) -> Result<ErrorTrace> {
    check_times(times)?;
    check_dims(split.dim(), &[h0, v, o])?;
    let (o, scale) = normalize(o)?;
    let h = h0 + v;
    let eig = eig_hermitian(&h)?;
    let full = HeisenbergEvolver::new(&eig, &o);
    let wp = split.band_basis.as_ref();
    let eig_p = eig_hermitian_unchecked(split.compress_band(&h).as_ref())?;
    let band = HeisenbergEvolver::new(&eig_p, &OperatorMatrix::wrap(split.compress_band(&o)));
    let epsilon =
        times.iter().map(|&t| spectral_norm((full.compressed_at(t, wp) - band.at(t).into_mat()).as_ref())).collect();
    let v_norm = op_norm(v);
    let params = BoundParams::new(v_norm, split.gap);
    let mut bounds =
        vec![BoundColumn { name: "b1", values: times.iter().map(|&t| bound_b1(&params, t)).collect(), rigorous: true }];
    if 2.0 * v_norm < split.gap {
        bounds.push(BoundColumn {
            name: "b2",
            values: times.iter().map(|&t| bound_b2(&params, t)).collect::<Result<_>>()?,
            rigorous: true,
        });
    }
    bounds.push(BoundColumn {
        name: "asymptotic",
        values: times.iter().map(|&t| bound_asymptotic(&params, t)).collect(),
        rigorous: false,
    });
    Ok(ErrorTrace {
        times: times.to_vec(),
        epsilon,
        bounds,
        metadata: vec![
            ("v_norm".into(), v_norm),
            ("gap".into(), split.gap),
            ("band_rank".into(), split.rank() as f64),
            ("observable_scale".into(), scale),
        ],
    })
}

/// The same `epsilon(t)` evaluated through the transformed frame:
/// `||P [S_{H1}(t)^dag L(t) S O S^dag L(t)^dag S_{H1}(t) - O] P||` with
/// `H1' = S H S^dag`, `L(t) = e^{-iH1 t} e^{iH1' t}` and
/// `S_{H1}(t) = e^{-iH1 t} S e^{iH1 t}`.
///
/// Only unitary (closed) variants are accepted.
pub fn epsilon_decomposition(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    split: &BandSplit,
    variant: SwtVariant,
    o: &OperatorMatrix,
    times: &[f64],
) -> Result<Vec<f64>> {
    if variant == SwtVariant::Open {
        return Err(Error::InvalidParam("decomposition route needs a unitary transform".into()));
    }
    check_times(times)?;
    check_dims(split.dim(), &[h0, v, o])?;
    let (o, _) = normalize(o)?;
    let res = match variant {
        SwtVariant::ClosedH1 => {
            let (v_diag, _) = crate::swt::block_split(v, split);
            swt_generator(&(h0 + &v_diag), v, split, variant)?
        }
        _ => swt_generator(h0, v, split, variant)?,
    };
    let h = h0 + v;
    let s = &res.s;
    let s_dag = s.adjoint();
    let h1p = &(s * &h) * &s_dag;
    let eig1 = eig_hermitian_unchecked(res.h1.as_ref())?;
    let eig1p = eig_hermitian_unchecked(h1p.as_ref())?;
    let sos = &(s * &o) * &s_dag;
    let wp = split.band_basis.as_ref();
    times
        .iter()
        .map(|&t| {
            let u1 = eig1.propagator(t);
            let u1_dag = u1.adjoint();
            let l = &u1 * &eig1p.propagator(-t);
            let s_t = &(&u1 * s) * &u1_dag;
            let inner = &(&l * &sos) * &l.adjoint();
            let m = &(&s_t.adjoint() * &inner) * &s_t;
            Ok(spectral_norm((&m - &o).compress(wp).as_ref()))
        })
        .collect()
}

/// `|<psi| e^{iHt} O e^{-iHt} |psi> - <psi|O|psi>|` for the eigenstate
/// `psi_index` (ascending order) of `H0`, which must be nondegenerate.
///
/// The `const_bound` column is present when `2||V|| < Delta0`, where
/// `Delta0` is the distance to the rest of the spectrum.
pub fn epsilon_single_state(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    psi_index: usize,
    o: &OperatorMatrix,
    times: &[f64],
) -> Result<ErrorTrace> {
    check_times(times)?;
    check_dims(h0.dim(), &[v, o])?;
    let eig0 = eig_hermitian(h0)?;
    let n = eig0.dim();
    if psi_index >= n {
        return Err(Error::IndexOutOfRange { index: psi_index, len: n });
    }
    let e = eig0.eigenvalues[psi_index];
    let tol = 1e-10 * eig0.norm().max(1.0);
    let rank = eig0.eigenvalues.iter().filter(|&&x| (x - e).abs() <= tol).count();
    if rank != 1 {
        return Err(Error::BandNotRankOne { rank });
    }
    if n == 1 {
        return Err(Error::NoComplement);
    }
    let window = (e - 0.5 * tol, e + 0.5 * tol);
    let split = band_split_from_eigen(&eig0, window)?;
    let (o, scale) = normalize(o)?;
    let eig = eig_hermitian(&(h0 + v))?;
    let evolver = HeisenbergEvolver::new(&eig, &o);
    let psi = split.band_basis.as_ref();
    let o0 = split.compress_band(&o)[(0, 0)];
    let epsilon =
        times.iter().map(|&t| (evolver.compressed_at(t, psi)[(0, 0)] - o0).norm_sqr()).map(libm::sqrt).collect();
    let v_norm = op_norm(v);
    let params = BoundParams::new(v_norm, split.gap);
    let mut bounds = Vec::new();
    if 2.0 * v_norm < split.gap {
        let b = bound_single_state(&params)?;
        bounds.push(BoundColumn { name: "const_bound", values: vec![b; times.len()], rigorous: true });
    }
    Ok(ErrorTrace {
        times: times.to_vec(),
        epsilon,
        bounds,
        metadata: vec![("v_norm".into(), v_norm), ("gap".into(), split.gap), ("observable_scale".into(), scale)],
    })
}

/// Dimension up to which commutator norms without block structure use a
/// dense SVD. Larger systems use a Lanczos estimate on the Hermitian
/// operator `i[O_X(t), O_Y]`.
pub const EXACT_NORM_DIM: usize = 256;

/// Relative stopping tolerance of the Lanczos norm estimate.
pub const LANCZOS_TOL: f64 = 1e-4;

/// `||[e^{iHt} O_X e^{-iHt}, O_Y]||` for every `O_Y` in `o_ys` and every time.
/// Both operators are normalized by their local norm. The result is indexed
/// `[time][y]`.
///
/// A Hermitian `O_Y` with two distinct local eigenvalues `b1`, `b2` (any Pauli
/// string) uses `||[A, O_Y]|| = |b1 - b2| ||P1 A P2||` with `P1`, `P2` its
/// spectral projectors, which costs one SVD of half the dimension and is
/// exact. Other operators go through a dense SVD up to [`EXACT_NORM_DIM`] and
/// Lanczos beyond.
pub fn commutator_norms(
    h: &OperatorMatrix,
    o_x: &LocalTerm,
    o_ys: &[LocalTerm],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_times(times)?;
    let n = h.dim();
    for term in core::iter::once(o_x).chain(o_ys) {
        if term.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: term.dim() });
        }
        if term.local_norm() == 0.0 {
            return Err(Error::InvalidParam("local operator must be nonzero".into()));
        }
    }
    let eig = eig_hermitian(h)?;
    let ox = o_x.full_matrix().scale_real(1.0 / o_x.local_norm());
    let x_hermitian = o_x.local().is_hermitian(linalg::HERMITIAN_TOL);
    let blocks = o_ys.iter().map(TwoLevel::of).collect::<Result<Vec<_>>>()?;
    let iterative: Vec<usize> = (0..o_ys.len())
        .filter(|&j| {
            blocks[j].is_none()
                && n > EXACT_NORM_DIM
                && x_hermitian
                && o_ys[j].local().is_hermitian(linalg::HERMITIAN_TOL)
        })
        .collect();
    let lanczos_ys: Vec<LocalTerm> = iterative.iter().map(|&j| o_ys[j].clone()).collect();
    let evolver = HeisenbergEvolver::new(&eig, &ox);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let a = evolver.at(t);
        let mut row: Vec<f64> = o_ys
            .iter()
            .zip(&blocks)
            .map(|(y, block)| match block {
                Some(b) => b.commutator_norm(a.as_ref(), x_hermitian) / y.local_norm(),
                None => {
                    let c = commutator_with_local(a.as_ref(), y);
                    spectral_norm(c.as_ref()) / y.local_norm()
                }
            })
            .collect();
        if !lanczos_ys.is_empty() {
            let est = lanczos_commutator_norms(a.as_ref(), &lanczos_ys);
            for (&j, e) in iterative.iter().zip(est) {
                row[j] = e;
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Spectral data of a local operator with exactly two distinct eigenvalues.
struct TwoLevel {
    /// Local eigenbasis `U`, and `U^dag`.
    basis: LocalTerm,
    basis_adj: LocalTerm,
    /// Whether local eigenvector `k` belongs to the lower eigenvalue.
    lower: Vec<bool>,
    spread: f64,
}

impl TwoLevel {
    fn of(b: &LocalTerm) -> Result<Option<Self>> {
        if !b.local().is_hermitian(linalg::HERMITIAN_TOL) {
            return Ok(None);
        }
        let eig = eig_hermitian(b.local())?;
        let ev = &eig.eigenvalues;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        let tol = 1e-12 * b.local_norm();
        if hi - lo <= tol || ev.iter().any(|&x| x - lo > tol && hi - x > tol) {
            return Ok(None);
        }
        let lower = ev.iter().map(|&x| x - lo <= tol).collect();
        let chain = b.chain_length();
        let basis = LocalTerm::new(eig.basis.clone(), b.support().clone(), chain)?;
        let basis_adj = LocalTerm::new(eig.basis.adjoint(), b.support().clone(), chain)?;
        Ok(Some(Self { basis, basis_adj, lower, spread: hi - lo }))
    }

    fn commutator_norm(&self, a: MatRef<'_, c64>, a_hermitian: bool) -> f64 {
        let n = a.nrows();
        let mut tmp = Mat::<c64>::zeros(n, n);
        let mut rot = Mat::<c64>::zeros(n, n);
        self.basis_adj.apply(a, tmp.as_mut());
        self.basis.apply_right(tmp.as_ref(), rot.as_mut());
        let (p1, p2): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| self.lower[self.basis.local_index(i)]);
        let block = |rows: &[usize], cols: &[usize]| {
            let m = Mat::from_fn(rows.len(), cols.len(), |i, j| rot[(rows[i], cols[j])]);
            spectral_norm(m.as_ref())
        };
        let mut norm = block(&p1, &p2);
        if !a_hermitian {
            norm = norm.max(block(&p2, &p1));
        }
        self.spread * norm
    }
}

/// Dense `[A, B]` for a local `B`.
fn commutator_with_local(a: MatRef<'_, c64>, b: &LocalTerm) -> Mat<c64> {
    let n = a.nrows();
    let mut ab = Mat::<c64>::zeros(n, n);
    let mut ba = Mat::<c64>::zeros(n, n);
    b.apply_right(a, ab.as_mut());
    b.apply(a, ba.as_mut());
    ab - ba
}

fn lanczos_commutator_norms(a: MatRef<'_, c64>, o_ys: &[LocalTerm]) -> Vec<f64> {
    let n = a.nrows();
    let k = o_ys.len();
    let mut bx = Mat::<c64>::zeros(n, k);
    let mut bax = Mat::<c64>::zeros(n, 1);
    let est = lanczos_norms(n, k, 400, LANCZOS_TOL, 0x5eed_1ce5, |x, mut y| {
        // y_j = i (A B_j - B_j A) x_j
        for (j, b) in o_ys.iter().enumerate() {
            b.apply(x.subcols(j, 1), bx.as_mut().subcols_mut(j, 1));
        }
        let abx = a * &bx;
        let ax = a * x;
        for (j, b) in o_ys.iter().enumerate() {
            b.apply(ax.as_ref().subcols(j, 1), bax.as_mut());
            for i in 0..n {
                y[(i, j)] = linalg::I * (abx[(i, j)] - bax[(i, 0)]);
            }
        }
    });
    est.iter().zip(o_ys).map(|(e, b)| e / b.local_norm()).collect()
}

/// `||[O_X(t), O_Y]||` for a single pair.
pub fn commutator_growth(h: &OperatorMatrix, o_x: &LocalTerm, o_y: &LocalTerm, times: &[f64]) -> Result<Vec<f64>> {
    Ok(commutator_norms(h, o_x, core::slice::from_ref(o_y), times)?.into_iter().map(|r| r[0]).collect())
}

/// Commutator norms of `O_X(t)` with `sigma^y_j` for every site of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct LightConeGrid {
    pub times: Vec<f64>,
    /// 1-based site labels.
    pub sites: Vec<usize>,
    /// Indexed `[time][site]`.
    pub commutator_norms: Vec<Vec<f64>>,
}

pub fn light_cone(h: &OperatorMatrix, o_x: &LocalTerm, n_sites: usize, times: &[f64]) -> Result<LightConeGrid> {
    if 1usize.checked_shl(n_sites as u32) != Some(h.dim()) {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: 1usize << n_sites.min(63) });
    }
    let sites: Vec<usize> = (1..=n_sites).collect();
    let o_ys = sites.iter().map(|&j| pauli_y_site(j, n_sites)).collect::<Result<Vec<_>>>()?;
    let commutator_norms = commutator_norms(h, o_x, &o_ys, times)?;
    Ok(LightConeGrid { times: times.to_vec(), sites, commutator_norms })
}

/// Least-squares fit of the crossing front.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityFit {
    /// Sites per unit time.
    pub velocity: f64,
    /// Intercept of crossing time against site.
    pub time_offset: f64,
    pub r_squared: f64,
    /// `(site, first crossing time)` for every site that crossed.
    pub crossings: Vec<(usize, f64)>,
}

/// Sites below this label are skipped when fitting the front.
pub const FIRST_FIT_SITE: usize = 3;

/// First time each site's norm reaches `threshold`, by linear interpolation
/// between samples. Sites that never cross are left out.
pub fn first_crossings(grid: &LightConeGrid, threshold: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (s, &site) in grid.sites.iter().enumerate() {
        for k in 0..grid.times.len() {
            let y = grid.commutator_norms[k][s];
            if y >= threshold {
                let t = if k == 0 {
                    grid.times[0]
                } else {
                    let (t0, t1) = (grid.times[k - 1], grid.times[k]);
                    let y0 = grid.commutator_norms[k - 1][s];
                    t0 + (threshold - y0) / (y - y0) * (t1 - t0)
                };
                out.push((site, t));
                break;
            }
        }
    }
    out
}

/// Regresses crossing time on site label for sites `j >= 3` and inverts the
/// slope.
pub fn velocity_extract(grid: &LightConeGrid, threshold: f64) -> Result<VelocityFit> {
    if !(threshold > 0.0 && threshold < 2.0) {
        return Err(Error::InvalidParam("threshold must lie in (0, 2)".into()));
    }
    let crossings: Vec<(usize, f64)> =
        first_crossings(grid, threshold).into_iter().filter(|(s, _)| *s >= FIRST_FIT_SITE).collect();
    if crossings.len() < 2 {
        return Err(Error::ThresholdNeverCrossed { crossings: crossings.len() });
    }
    let xs: Vec<f64> = crossings.iter().map(|c| c.0 as f64).collect();
    let ys: Vec<f64> = crossings.iter().map(|c| c.1).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    if !(slope > 0.0) {
        return Err(Error::InvalidParam("crossing front does not advance".into()));
    }
    Ok(VelocityFit { velocity: 1.0 / slope, time_offset: intercept, r_squared, crossings })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, R^2)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

/// `2 e^{kappa l0} min(|X|, |Y|) exp(-kappa [dist(X, Y) - v_LR t])` for
/// unit-norm `O_X`, `O_Y`.
pub fn lr_bound_eval(params: &LiebRobinsonParams, x: &SupportSet, y: &SupportSet, t: f64) -> Result<f64> {
    params.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParam("time must be finite and nonnegative".into()));
    }
    let k = params.kappa;
    let prefactor = 2.0 * libm::exp(k * params.l0) * x.len().min(y.len()) as f64;
    Ok(prefactor * libm::exp(-k * (x.dist(y) as f64 - params.velocity() * t)))
}

/// Time scale `(Delta0 / (v^d ||V||_*^2))^{1/(d+1)}` up to which the local
/// bound stays small.
pub fn saturation_time(gap: f64, velocity: f64, v_star: f64, d: usize) -> f64 {
    let d = d as f64;
    libm::pow(gap / (libm::pow(velocity, d) * v_star * v_star), 1.0 / (d + 1.0))
}

/// Residuals of the identities a closed or open transform must satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct SwtIdentityReport {
    pub variant: SwtVariant,
    /// Defining commutator equation of `T`.
    pub generator_residual: f64,
    /// `||S H S^-1 - H1 - V'||` with the truncated `V'`.
    pub conjugation_residual: f64,
    pub tail_estimate: f64,
    pub t_norm: f64,
    pub t_pq_norm: f64,
    /// `||P H1 - P H P||`.
    pub ph1_residual: f64,
    /// Largest difference of the direct and decomposed `epsilon(t)` over the
    /// sample times; `None` for the open variant.
    pub decomposition_agreement: Option<f64>,
    pub sample_times: Vec<f64>,
}

/// Checks all identities for one instance. Sample times are `{0.1, 1, 5}/||V||`
/// (or `{0.1, 1, 5}` when `V = 0`).
pub fn verify_swt_identities(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    split: &BandSplit,
    variant: SwtVariant,
    o: &OperatorMatrix,
) -> Result<SwtIdentityReport> {
    let res = swt_full(h0, v, split, variant, 1e-14)?;
    let vp = res.v_prime.as_ref().expect("filled by swt_full");
    let v_norm = op_norm(v);
    let unit = if v_norm > 0.0 { 1.0 / v_norm } else { 1.0 };
    let sample_times = vec![0.1 * unit, unit, 5.0 * unit];
    let h = h0 + v;
    let p = &split.p;
    let ph1_residual = op_norm(&(&(p * &res.h1) - &(&(p * &h) * p)));
    let decomposition_agreement = if variant == SwtVariant::Open {
        None
    } else {
        let direct = epsilon_closed(h0, v, split, o, &sample_times)?;
        let dec = epsilon_decomposition(h0, v, split, variant, o, &sample_times)?;
        Some(direct.epsilon.iter().zip(&dec).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    };
    Ok(SwtIdentityReport {
        variant,
        generator_residual: generator_residual(&res, h0),
        conjugation_residual: conjugation_residual(&res, h0, v)?,
        tail_estimate: vp.tail_estimate,
        t_norm: res.t_norm,
        t_pq_norm: res.t_pq_norm,
        ph1_residual,
        decomposition_agreement,
        sample_times,
    })
}

/// Residuals of the local transform on a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalIdentityReport {
    /// `||[H0, T] - sum_A (Q_A V_A P_A + h.c.)||`.
    pub generator_residual: f64,
    /// `||P H1 - P H P||` with `P` the ground space projector of `H0`.
    pub ph1_residual: f64,
    /// `||P H1 Q||`.
    pub ph1q_residual: f64,
    /// `||H||`, for relative comparisons.
    pub h_norm: f64,
    pub local_gap: f64,
}

pub fn verify_local_identities(h0: &InteractionSum, v: &InteractionSum) -> Result<LocalIdentityReport> {
    let loc = crate::lattice::local_swt(h0, v)?;
    let h0m = h0.total();
    let h = &h0m + &v.total();
    let t = loc.t();
    let generator_residual = op_norm(&(&h0m.commutator(&t) - &loc.off_diagonal.total()));
    let p = ground_projector(&h0m)?;
    let q = &OperatorMatrix::identity(p.dim()) - &p;
    let h1 = loc.h1(h0);
    let ph1 = &p * &h1;
    let ph1_residual = op_norm(&(&ph1 - &(&(&p * &h) * &p)));
    let ph1q_residual = op_norm(&(&ph1 * &q));
    Ok(LocalIdentityReport {
        generator_residual,
        ph1_residual,
        ph1q_residual,
        h_norm: op_norm(&h),
        local_gap: loc.local_gap,
    })
}

/// Projector onto the lowest eigenspace of a Hermitian matrix.
pub fn ground_projector(h: &OperatorMatrix) -> Result<OperatorMatrix> {
    let eig = eig_hermitian(h)?;
    let e0 = eig.eigenvalues[0];
    let tol = 1e-10 * eig.norm().max(1.0);
    Ok(eig.map(|x| if x - e0 <= tol { linalg::ONE } else { c64::new(0.0, 0.0) }))
}
