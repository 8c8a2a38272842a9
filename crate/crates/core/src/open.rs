//! Markovian open systems in the Heisenberg picture.
//!
//! Observables evolve under the adjoint Lindblad generator
//! `L^dag[O] = i[V, O] + sum_j (J_j^dag O J_j - {J_j^dag J_j, O}/2)`.
//! Strong dissipation `H0 = sum_j J_j^dag J_j / 2` plays the role of the
//! gapped Hamiltonian; its kernel is the decoherence-free subspace (DFS).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::DenseSolveCore;

use crate::closed::{check_times, normalize, BoundColumn, ErrorTrace};
use crate::linalg::{self, eig_hermitian, min_singular_value, op_norm, pauli, HeisenbergEvolver, OperatorMatrix};
use crate::swt::{
    band_split_from_eigen, bound_open, bound_open_asymptotic, swt_generator, BandSplit, BoundParams, SwtVariant,
};
use crate::{Error, Result};

/// Error trace of the Zeno approximation; same layout as the closed one.
pub type OpenErrorTrace = ErrorTrace;

/// Relative tolerance for kernel membership and DFS checks.
pub const DFS_TOL: f64 = 1e-10;

/// Norm drift above which [`evolve_open`] reports [`Error::StepTooLarge`].
pub const MAX_NORM_DRIFT: f64 = 1e-4;

/// Drive `V` and jump operators `J_j`, with the derived `H0` and its gap.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    v: OperatorMatrix,
    jumps: Vec<OperatorMatrix>,
    h0: OperatorMatrix,
    /// `sum_j J_j^dag J_j`.
    k: OperatorMatrix,
    gap: f64,
    jump_norm_sq_sum: f64,
}

impl LindbladModel {
    pub fn new(v: OperatorMatrix, jumps: Vec<OperatorMatrix>) -> Result<Self> {
        let n = v.dim();
        let defect = v.hermitian_defect();
        if defect > linalg::HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let mut k = OperatorMatrix::zeros(n);
        let mut jump_norm_sq_sum = 0.0;
        for j in &jumps {
            if j.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: j.dim() });
            }
            k += &(&j.adjoint() * j);
            let nj = op_norm(j);
            jump_norm_sq_sum += nj * nj;
        }
        let k = k.hermitian_part();
        let h0 = k.scale_real(0.5);
        let eig = eig_hermitian(&h0)?;
        let tol = DFS_TOL * eig.norm().max(f64::MIN_POSITIVE);
        let gap = eig.eigenvalues.iter().copied().filter(|&x| x > tol).fold(f64::INFINITY, f64::min);
        let gap = if gap.is_finite() { gap } else { 0.0 };
        Ok(Self { v, jumps, h0, k, gap, jump_norm_sq_sum })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn v(&self) -> &OperatorMatrix {
        &self.v
    }

    pub fn jumps(&self) -> &[OperatorMatrix] {
        &self.jumps
    }

    /// `sum_j J_j^dag J_j / 2`.
    pub fn h0(&self) -> &OperatorMatrix {
        &self.h0
    }

    /// Smallest nonzero eigenvalue of `H0`, or 0 when `H0 = 0`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `sum_j ||J_j||^2`.
    pub fn jump_norm_sq_sum(&self) -> f64 {
        self.jump_norm_sq_sum
    }

    /// `c = sum_j ||J_j||^2 / Delta0`.
    pub fn c(&self) -> f64 {
        self.jump_norm_sq_sum / self.gap
    }

    /// Step size `0.05 / (||V|| + sum_j ||J_j||^2)` used when none is given.
    pub fn default_step(&self) -> f64 {
        let rate = op_norm(&self.v) + self.jump_norm_sq_sum;
        if rate > 0.0 {
            0.05 / rate
        } else {
            0.05
        }
    }
}

/// `i[V, O] + sum_j (J_j^dag O J_j - {J_j^dag J_j, O}/2)`.
pub fn lindblad_adjoint_rhs(m: &LindbladModel, o: &OperatorMatrix) -> Result<OperatorMatrix> {
    if o.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: o.dim() });
    }
    Ok(Generator::new(m).apply(o))
}

/// `L^dag[O] = G O + O G^dag + sum_j J_j^dag O J_j` with `G = iV - K/2`.
struct Generator {
    g: OperatorMatrix,
    g_dag: OperatorMatrix,
    jumps: Vec<(OperatorMatrix, OperatorMatrix)>,
}

impl Generator {
    fn new(m: &LindbladModel) -> Self {
        let g = &m.v.scale(linalg::I) - &m.k.scale_real(0.5);
        let g_dag = g.adjoint();
        let jumps = m.jumps.iter().map(|j| (j.adjoint(), j.clone())).collect();
        Self { g, g_dag, jumps }
    }

    fn apply(&self, o: &OperatorMatrix) -> OperatorMatrix {
        let mut out = &(&self.g * o) + &(o * &self.g_dag);
        for (jd, j) in &self.jumps {
            out += &(&(jd * o) * j);
        }
        out
    }

    fn rk4_step(&self, o: &OperatorMatrix, h: f64) -> OperatorMatrix {
        let k1 = self.apply(o);
        let k2 = self.apply(&(o + &(&k1 * (0.5 * h))));
        let k3 = self.apply(&(o + &(&k2 * (0.5 * h))));
        let k4 = self.apply(&(o + &(&k3 * h)));
        let mut incr = &k1 + &k4;
        incr += &(&(&k2 + &k3) * 2.0);
        o + &(&incr * (h / 6.0))
    }
}

/// `e^{t L^dag}[O]` at each requested time by fixed-step RK4.
///
/// Times must be ascending and nonnegative. Each interval between output
/// times is split into equal substeps no longer than `step`. Returns
/// [`Error::StepTooLarge`] when `||O_t||` exceeds `||O||` by more than
/// [`MAX_NORM_DRIFT`].
pub fn evolve_open(m: &LindbladModel, o: &OperatorMatrix, times: &[f64], step: f64) -> Result<Vec<OperatorMatrix>> {
    if o.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: o.dim() });
    }
    check_times(times)?;
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParam("times must be nonnegative".into()));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParam("step must be positive".into()));
    }
    let gen = Generator::new(m);
    let o_norm = op_norm(o);
    let mut out = Vec::with_capacity(times.len());
    let mut cur = o.clone();
    let mut t_cur = 0.0;
    for &t in times {
        let span = t - t_cur;
        if span > 0.0 {
            let n = libm::ceil(span / step).max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                cur = gen.rk4_step(&cur, h);
            }
            t_cur = t;
        }
        let drift = op_norm(&cur) - o_norm;
        if drift > MAX_NORM_DRIFT * o_norm.max(1.0) {
            return Err(Error::StepTooLarge { drift });
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// Kernel of `H0` as a band split, with `Delta0` the smallest nonzero
/// eigenvalue. Every jump must annihilate the kernel.
pub fn dfs_projector(m: &LindbladModel) -> Result<BandSplit> {
    let eig = eig_hermitian(&m.h0)?;
    let tol = DFS_TOL * eig.norm().max(f64::MIN_POSITIVE);
    if eig.eigenvalues[0] > tol {
        return Err(Error::NoDfs);
    }
    let split = band_split_from_eigen(&eig, (-tol, tol))?;
    for (idx, j) in m.jumps.iter().enumerate() {
        let residual = op_norm(&(j * &split.p));
        if residual > DFS_TOL * op_norm(j) {
            return Err(Error::DfsViolation { jump: idx, residual });
        }
    }
    Ok(split)
}

/// `epsilon(t) = ||P e^{tL^dag}[O] P - P e^{iV_P t} O e^{-iV_P t} P||` with
/// `V_P = PVP`.
///
/// Bound columns: `bound_exact` (rigorous) and `bound_asymptotic`
/// (strong-dissipation limit).
pub fn epsilon_open(m: &LindbladModel, o: &OperatorMatrix, times: &[f64], step: f64) -> Result<OpenErrorTrace> {
    let split = dfs_projector(m)?;
    let (o, scale) = normalize(o)?;
    let evolved = evolve_open(m, &o, times, step)?;
    let wp = split.band_basis.as_ref();
    let eig_p = crate::linalg::eig_hermitian_unchecked(split.compress_band(&m.v).as_ref())?;
    let band = HeisenbergEvolver::new(&eig_p, &OperatorMatrix::wrap(split.compress_band(&o)));
    let epsilon = times
        .iter()
        .zip(&evolved)
        .map(|(&t, ot)| linalg::spectral_norm((ot.compress(wp) - band.at(t).into_mat()).as_ref()))
        .collect();
    let v_norm = op_norm(&m.v);
    let params = BoundParams::new(v_norm, split.gap).with_jumps(m.jump_norm_sq_sum);
    let bounds = vec![
        BoundColumn {
            name: "bound_exact",
            values: times.iter().map(|&t| bound_open(&params, t)).collect(),
            rigorous: true,
        },
        BoundColumn {
            name: "bound_asymptotic",
            values: times.iter().map(|&t| bound_open_asymptotic(&params, t)).collect(),
            rigorous: false,
        },
    ];
    Ok(ErrorTrace {
        times: times.to_vec(),
        epsilon,
        bounds,
        metadata: vec![
            (String::from("v_norm"), v_norm),
            ("gap".into(), split.gap),
            ("c".into(), params.c()),
            ("dfs_rank".into(), split.rank() as f64),
            ("step".into(), step),
            ("observable_scale".into(), scale),
        ],
    })
}

fn check_example_params(delta0: f64, omega: f64) -> Result<()> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidParam("delta0 must be positive".into()));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidParam("omega must be finite".into()));
    }
    Ok(())
}

/// Resonantly driven decaying two-level atom. Basis order `(|e>, |g>)`.
///
/// `J = sqrt(2 Delta0) |g><e|`, `V = (Omega/2) sigma^x`, `O = sigma^y`.
pub fn build_example1(delta0: f64, omega: f64) -> Result<(LindbladModel, OperatorMatrix)> {
    check_example_params(delta0, omega)?;
    let j = pauli::lower().scale_real(libm::sqrt(2.0 * delta0));
    let v = pauli::x().scale_real(omega / 2.0);
    Ok((LindbladModel::new(v, vec![j])?, pauli::y()))
}

/// Two two-level systems with a joint decay `J = sqrt(2 Delta0) sigma_1^- sigma_2^-`,
/// drive `V = (Omega/2) sigma_1^x` and flip-flop observable
/// `O = (sigma_1^x sigma_2^x + sigma_1^y sigma_2^y) / 2`.
pub fn build_example2(delta0: f64, omega: f64) -> Result<(LindbladModel, OperatorMatrix)> {
    check_example_params(delta0, omega)?;
    let j = pauli::lower().kron(&pauli::lower()).scale_real(libm::sqrt(2.0 * delta0));
    let v = pauli::x().kron(&pauli::identity()).scale_real(omega / 2.0);
    let o = (&pauli::x().kron(&pauli::x()) + &pauli::y().kron(&pauli::y())).scale_real(0.5);
    Ok((LindbladModel::new(v, vec![j])?, o))
}

/// `S^{-1} J S - J`.
pub fn modified_jump(s: &OperatorMatrix, j: &OperatorMatrix) -> Result<OperatorMatrix> {
    if s.dim() != j.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: j.dim() });
    }
    let smallest = min_singular_value(s);
    if smallest <= 1e-12 * op_norm(s) {
        return Err(Error::SingularS { smallest_singular_value: smallest });
    }
    let s_inv = OperatorMatrix::wrap(s.mat().partial_piv_lu().inverse());
    Ok(&(&(&s_inv * j) * s) - j)
}

/// `||J|| (e^{2||T||} - 1)`, the bound on a modified jump.
pub fn modified_jump_bound(j_norm: f64, t_norm: f64) -> f64 {
    j_norm * libm::expm1(2.0 * t_norm)
}

/// Dynamics inside the DFS generated by the projected modified jumps
/// `P J~_j P` alone, with `S` from the open Schrieffer-Wolff generator.
/// Returns `P O_t P` compressed to the DFS at each time.
pub fn effective_dfs_evolution(
    m: &LindbladModel,
    o: &OperatorMatrix,
    times: &[f64],
    step: f64,
) -> Result<Vec<OperatorMatrix>> {
    let split = dfs_projector(m)?;
    let res = swt_generator(&m.h0, &m.v, &split, SwtVariant::Open)?;
    let wp = split.band_basis.as_ref();
    let jumps = m
        .jumps
        .iter()
        .map(|j| Ok(OperatorMatrix::wrap(modified_jump(&res.s, j)?.compress(wp))))
        .collect::<Result<Vec<_>>>()?;
    let rank = split.rank();
    let eff = LindbladModel::new(OperatorMatrix::zeros(rank), jumps)?;
    evolve_open(&eff, &OperatorMatrix::wrap(split.compress_band(o)), times, step)
}

/// Least-squares slope of `epsilon` over samples with `t` in `[lo, hi]`.
pub fn slope_fit(trace: &OpenErrorTrace, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidParam("slope window must satisfy lo < hi".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        trace.times.iter().zip(&trace.epsilon).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, e)| (*t, *e)).unzip();
    if xs.len() < 2 {
        return Err(Error::InvalidParam("slope window holds fewer than two samples".into()));
    }
    Ok(crate::closed::linear_fit(&xs, &ys).0)
}

/// Relative spread allowed over the final tenth of a trace.
pub const SATURATION_TOL: f64 = 0.01;

/// Mean of the final 10% of samples, provided their spread is below 1%.
pub fn saturation_value(trace: &OpenErrorTrace) -> Result<f64> {
    let n = trace.epsilon.len();
    if n == 0 {
        return Err(Error::InvalidParam("empty trace".into()));
    }
    let tail = &trace.epsilon[n - (n / 10).max(1)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let variation = if mean != 0.0 { (hi - lo) / mean.abs() } else { hi - lo };
    if variation > SATURATION_TOL {
        return Err(Error::NotSaturated { variation });
    }
    Ok(mean)
}

/// `2 Omega Delta0 / (2 Delta0^2 + Omega^2)`, the long-time error of the
/// first example.
pub fn example1_saturation(delta0: f64, omega: f64) -> f64 {
    2.0 * omega * delta0 / (2.0 * delta0 * delta0 + omega * omega)
}

/// `Omega^2 / (4 Delta0)`, the leading error slope of the second example.
pub fn example2_slope(delta0: f64, omega: f64) -> f64 {
    omega * omega / (4.0 * delta0)
}
