//! Closed-form error bounds.
//!
//! All functions are cheap scalar evaluations. Names follow the quantities
//! they bound: `b1`/`b2` for the two linear-in-time bounds on the closed
//! error, `single_state` for the time-independent bound on an isolated
//! eigenstate, `open` for the Zeno bound and `many_body` for the
//! light-cone-volume bound of local observables.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Scalars shared by the global (few-body) bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    /// `||V||` (or `||V||_*` for local bounds).
    pub v_norm: f64,
    /// `Delta0`.
    pub gap: f64,
    /// Apply the pi/2 factor for bands split by a Sylvester equation with
    /// interleaved spectra.
    pub multiband: bool,
    /// `sum_j ||J_j||^2`, only used by the open-system bounds.
    pub jump_norm_sq_sum: f64,
}

impl BoundParams {
    pub fn new(v_norm: f64, gap: f64) -> Self {
        Self { v_norm, gap, multiband: false, jump_norm_sq_sum: 0.0 }
    }

    pub fn with_multiband(mut self, on: bool) -> Self {
        self.multiband = on;
        self
    }

    pub fn with_jumps(mut self, jump_norm_sq_sum: f64) -> Self {
        self.jump_norm_sq_sum = jump_norm_sq_sum;
        self
    }

    /// `||V|| / Delta0`.
    pub fn ratio(&self) -> f64 {
        self.v_norm / self.gap
    }

    /// `c = sum_j ||J_j||^2 / Delta0`.
    pub fn c(&self) -> f64 {
        self.jump_norm_sq_sum / self.gap
    }

    fn inflate(&self, x: f64) -> f64 {
        if self.multiband {
            FRAC_PI_2 * x
        } else {
            x
        }
    }

    /// `||V|| / (Delta0 - 2||V||)`, requires `2||V|| < Delta0`.
    fn shifted_ratio(&self) -> Result<f64> {
        if 2.0 * self.v_norm >= self.gap {
            return Err(Error::GapTooSmall { v_norm: self.v_norm, gap: self.gap });
        }
        Ok(self.v_norm / (self.gap - 2.0 * self.v_norm))
    }
}

/// `f(x) = ((x - 1) e^x + 1) / x` with `f(0) = 0`.
pub fn f_slope(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeInput(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 0.5 {
        // f(x) = sum_{n>=1} n x^n / (n+1)!
        let mut acc = 0.0;
        let mut pow_over_fact = 1.0; // x^n / (n+1)!
        for n in 1..40 {
            pow_over_fact *= x / (n as f64 + 1.0);
            let term = n as f64 * pow_over_fact;
            acc += term;
            if term < 1e-18 * acc {
                break;
            }
        }
        return Ok(acc);
    }
    Ok(((x - 1.0) * libm::exp(x) + 1.0) / x)
}

/// Intercept of the first bound, `4||V||/Delta0`.
pub fn intercept_b1(p: &BoundParams) -> f64 {
    4.0 * p.inflate(p.ratio())
}

/// Slope of the first bound, `2(e^{2||V||/Delta0} - 1)||V||`.
pub fn slope_b1(p: &BoundParams) -> f64 {
    2.0 * libm::expm1(2.0 * p.inflate(p.ratio())) * p.v_norm
}

/// `4||V||/Delta0 + 2(e^{2||V||/Delta0} - 1)||V|| t`.
pub fn bound_b1(p: &BoundParams, t: f64) -> f64 {
    intercept_b1(p) + slope_b1(p) * t
}

pub fn intercept_b2(p: &BoundParams) -> Result<f64> {
    Ok(4.0 * p.inflate(p.shifted_ratio()?))
}

pub fn slope_b2(p: &BoundParams) -> Result<f64> {
    Ok(2.0 * f_slope(2.0 * p.inflate(p.shifted_ratio()?))? * p.v_norm)
}

/// `4y + 2 f(2y) ||V|| t` with `y = ||V||/(Delta0 - 2||V||)`.
pub fn bound_b2(p: &BoundParams, t: f64) -> Result<f64> {
    Ok(intercept_b2(p)? + slope_b2(p)? * t)
}

/// `||V'||` bound for the `[H0, T] = V_off` generator, `(e^{2||V||/Delta0} - 1)||V||`.
pub fn bound_vprime_h0(p: &BoundParams) -> f64 {
    libm::expm1(2.0 * p.inflate(p.ratio())) * p.v_norm
}

/// `||V'||` bound for the `[T, H1] = -V_off` generator, `f(2y)||V||`.
pub fn bound_vprime_h1(p: &BoundParams) -> Result<f64> {
    Ok(f_slope(2.0 * p.inflate(p.shifted_ratio()?))? * p.v_norm)
}

/// Large-gap form `4||V||/Delta0 + 2||V||^2 t / Delta0`. Not rigorous: it
/// can be exceeded by terms of order `(||V||/Delta0)^2`.
pub fn bound_asymptotic(p: &BoundParams, t: f64) -> f64 {
    4.0 * p.ratio() + 2.0 * p.v_norm * p.ratio() * t
}

/// Ratio `x = ||V||/Delta0` at which the slopes of the two linear bounds
/// coincide; below it the second bound grows more slowly.
pub fn slope_crossover() -> f64 {
    // Slopes divided by ||V||.
    let g = |x: f64| {
        let y = x / (1.0 - 2.0 * x);
        2.0 * libm::expm1(2.0 * x) - 2.0 * f_slope(2.0 * y).unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (1e-6, 0.5 - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `8||V|| / (Delta0 - 2||V||)` for a single isolated eigenstate.
pub fn bound_single_state(p: &BoundParams) -> Result<f64> {
    Ok(8.0 * p.shifted_ratio()?)
}

/// Open-system bound
/// `(e^{2x} - 1){1 + e^{2x} + e^{4x}[2||V|| + (e^{2x} - 1) sum_j ||J_j||^2] t}`
/// with `x = ||V||/Delta0`.
pub fn bound_open(p: &BoundParams, t: f64) -> f64 {
    let x = p.ratio();
    let e = libm::expm1(2.0 * x);
    let e2 = 1.0 + e;
    e * (1.0 + e2 + e2 * e2 * (2.0 * p.v_norm + e * p.jump_norm_sq_sum) * t)
}

/// Strong-dissipation limit `4x[1 + (1 + c)||V|| t]`.
pub fn bound_open_asymptotic(p: &BoundParams, t: f64) -> f64 {
    4.0 * p.ratio() * (1.0 + (1.0 + p.c()) * p.v_norm * t)
}

/// Volume `b(r) = sum_m c_m r^m` of a radius-`r` ball, a polynomial of degree
/// equal to the lattice dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct BallVolume {
    pub coeffs: Vec<f64>,
}

impl BallVolume {
    /// `2r + 1`.
    pub fn chain() -> Self {
        Self { coeffs: vec![1.0, 2.0] }
    }

    /// `1 + 3r + 3r^2`.
    pub fn triangular() -> Self {
        Self { coeffs: vec![1.0, 3.0, 3.0] }
    }

    /// `1 + 8r/3 + 2r^2 + 4r^3/3`.
    pub fn cubic() -> Self {
        Self { coeffs: vec![1.0, 8.0 / 3.0, 2.0, 4.0 / 3.0] }
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }
}

/// `Li_{-k}(x) = sum_{n>=1} n^k x^n = x A_k(x) / (1 - x)^{k+1}` with the
/// Eulerian polynomial `A_k`.
pub fn polylog_neg(k: usize, x: f64) -> f64 {
    // Eulerian numbers, row by row.
    let mut row = vec![1.0f64];
    for m in 1..=k {
        let mut next = vec![0.0f64; m];
        for j in 0..m {
            let a = if j < row.len() { (j + 1) as f64 * row[j] } else { 0.0 };
            let b = if j >= 1 && j - 1 < row.len() { (m - j) as f64 * row[j - 1] } else { 0.0 };
            next[j] = a + b;
        }
        row = next;
    }
    let poly = row.iter().rev().fold(0.0, |acc, c| acc * x + c);
    x * poly / libm::pow(1.0 - x, (k + 1) as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `p_kappa(r) = 2(e^kappa - 1) b(r - d/dkappa) (e^kappa - 1)^{-1}`.
///
/// Expanding `(r - d/dkappa)^m (e^kappa - 1)^{-1}` gives
/// `sum_k C(m,k) r^{m-k} Li_{-k}(e^{-kappa})`.
pub fn p_kappa(ball: &BallVolume, kappa: f64, r: f64) -> f64 {
    let x = libm::exp(-kappa);
    let mut acc = 0.0;
    for (m, &c) in ball.coeffs.iter().enumerate() {
        for k in 0..=m {
            acc += c * binomial(m, k) * libm::pow(r, (m - k) as f64) * polylog_neg(k, x);
        }
    }
    2.0 * libm::expm1(kappa) * acc
}

/// `int_0^r p_kappa(r' + s) dr'`.
fn p_kappa_integral(ball: &BallVolume, kappa: f64, s: f64, r: f64) -> f64 {
    let x = libm::exp(-kappa);
    let mut acc = 0.0;
    for (m, &c) in ball.coeffs.iter().enumerate() {
        for k in 0..=m {
            let j = (m - k + 1) as f64;
            let prim = (libm::pow(r + s, j) - libm::pow(s, j)) / j;
            acc += c * binomial(m, k) * prim * polylog_neg(k, x);
        }
    }
    2.0 * libm::expm1(kappa) * acc
}

/// Parameters of the many-body bound on a local observable.
#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyParams {
    /// `||V||_*`.
    pub v_star: f64,
    pub gap: f64,
    /// Overlap constant of `H0`.
    pub w: usize,
    /// Locality degree of `T`.
    pub u: usize,
    /// Lieb-Robinson velocity.
    pub velocity: f64,
    pub kappa: f64,
    /// `|X|`.
    pub x_size: usize,
    /// `r_X`.
    pub r_x: f64,
    /// Largest diameter of an `H0` term.
    pub l0: f64,
    pub ball: BallVolume,
}

impl ManyBodyParams {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParam(alloc::format!("many-body bound: {what}")));
        if !(self.kappa > 0.0) {
            return bad("kappa must be positive");
        }
        if !(self.velocity > 0.0) {
            return bad("velocity must be positive");
        }
        if !(self.gap > 0.0) {
            return bad("gap must be positive");
        }
        if self.x_size == 0 {
            return bad("|X| must be at least 1");
        }
        if self.v_star < 0.0 || self.r_x < 0.0 || self.l0 < 0.0 {
            return bad("norms and radii must be nonnegative");
        }
        if self.ball.coeffs.is_empty() {
            return bad("ball volume polynomial is empty");
        }
        Ok(())
    }

    /// Shift `r_X + l0 + ln|X| / kappa` inside `p~`.
    fn shift(&self) -> f64 {
        self.r_x + self.l0 + libm::log(self.x_size as f64) / self.kappa
    }

    /// `p~(r) = p_kappa(r + r_X + l0 + ln|X|/kappa)`.
    pub fn p_tilde(&self, r: f64) -> f64 {
        p_kappa(&self.ball, self.kappa, r + self.shift())
    }

    /// `P~(r) = int_0^r p~`.
    pub fn p_tilde_integral(&self, r: f64) -> f64 {
        p_kappa_integral(&self.ball, self.kappa, self.shift(), r)
    }
}

/// `(||V||_*/Delta0) w [2|X| + p~(vt) + 4u v^{-1} ||V||_* P~(vt)]`.
pub fn bound_many_body(p: &ManyBodyParams, t: f64) -> Result<f64> {
    p.validate()?;
    let vt = p.velocity * t;
    let inner =
        2.0 * p.x_size as f64 + p.p_tilde(vt) + 4.0 * p.u as f64 / p.velocity * p.v_star * p.p_tilde_integral(vt);
    Ok(p.v_star / p.gap * p.w as f64 * inner)
}

/// The same bound for a chain, written directly with
/// `p~(r) = 2[2r + 2r_X + 2 ln(C|X|)/kappa + (3e^kappa - 1)/(e^kappa - 1)]`
/// and `C = e^{kappa l0}`.
pub fn bound_many_body_1d_explicit(p: &ManyBodyParams, t: f64) -> Result<f64> {
    p.validate()?;
    if p.ball != BallVolume::chain() {
        return Err(Error::InvalidParam("explicit route only covers the 1D chain".into()));
    }
    let ek = libm::exp(p.kappa);
    let k = (3.0 * ek - 1.0) / (ek - 1.0);
    let ln_cx = p.kappa * p.l0 + libm::log(p.x_size as f64);
    let base = 2.0 * p.r_x + 2.0 * ln_cx / p.kappa + k;
    let vt = p.velocity * t;
    let p_val = 2.0 * (2.0 * vt + base);
    let p_int = 2.0 * (vt * vt + base * vt);
    let inner = 2.0 * p.x_size as f64 + p_val + 4.0 * p.u as f64 / p.velocity * p.v_star * p_int;
    Ok(p.v_star / p.gap * p.w as f64 * inner)
}

/// `||V'||_mu` bound for the local transformation:
/// `w ||V||_* e^{mu(u-1)} {[1 - 2(u-1) e^{mu(u-1)} ||T||_*]^{-2u/(u-1)} - 1}`,
/// with `||T||_*` taken as `w ||V||_* / Delta0`.
pub fn bound_vprime_local(p: &ManyBodyParams, mu: f64) -> Result<f64> {
    let t_star = p.w as f64 * p.v_star / p.gap;
    vprime_local_from_t(p.w, p.u, p.v_star, t_star, mu)
}

/// Same as [`bound_vprime_local`] with an explicit `||T||_*`.
pub fn vprime_local_from_t(w: usize, u: usize, v_star: f64, t_star: f64, mu: f64) -> Result<f64> {
    if u < 2 {
        return Err(Error::InvalidParam("locality degree u must be at least 2".into()));
    }
    if mu < 0.0 {
        return Err(Error::NegativeInput(mu));
    }
    let um1 = (u - 1) as f64;
    let e = libm::exp(mu * um1);
    let z = 2.0 * um1 * e * t_star;
    if z >= 1.0 {
        return Err(Error::ConvergenceViolated { lhs: z, rhs: 1.0 });
    }
    let alpha = 2.0 * u as f64 / um1;
    // (1 - z)^{-alpha} - 1 via log1p/expm1 to keep small z accurate.
    let growth = libm::expm1(-alpha * libm::log1p(-z));
    Ok(w as f64 * v_star * e * growth)
}

/// Parameters of the Lieb-Robinson bound for `H = H0 + V` with commuting `H0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiebRobinsonParams {
    pub kappa: f64,
    pub eta: f64,
    /// `||V||_{kappa + eta}`.
    pub v_norm: f64,
    pub w: usize,
    /// Largest diameter of an `H0` term.
    pub l0: f64,
    /// Lattice dimension.
    pub d: usize,
    /// Constant with `|A| <= C_d (l_A + 1)^d`.
    pub c_d: f64,
}

impl LiebRobinsonParams {
    /// 1D chain with `C_d = 2`.
    pub fn chain(kappa: f64, eta: f64, v_norm: f64, w: usize, l0: f64) -> Self {
        Self { kappa, eta, v_norm, w, l0, d: 1, c_d: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.eta > 0.0) {
            return Err(Error::InvalidParam("kappa and eta must be positive".into()));
        }
        if self.d == 0 || !(self.c_d > 0.0) || self.v_norm < 0.0 || self.l0 < 0.0 {
            return Err(Error::InvalidParam("invalid Lieb-Robinson constants".into()));
        }
        Ok(())
    }

    /// `(2 w C_d e^eta / kappa) (d/(e eta))^d e^{2(kappa+eta) l0} ||V||_{kappa+eta}`.
    pub fn velocity(&self) -> f64 {
        let d = self.d as f64;
        2.0 * self.w as f64 * self.c_d * libm::exp(self.eta) / self.kappa
            * libm::pow(d / (core::f64::consts::E * self.eta), d)
            * libm::exp(2.0 * (self.kappa + self.eta) * self.l0)
            * self.v_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_slope_values() {
        assert!((f_slope(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f_slope(0.0).unwrap(), 0.0);
        assert!(matches!(f_slope(-1.0), Err(Error::NegativeInput(_))));
        // Series and closed form agree where both are accurate.
        for x in [0.3, 0.49, 0.51, 0.7] {
            let closed = ((x - 1.0) * libm::exp(x) + 1.0) / x;
            assert!((f_slope(x).unwrap() - closed).abs() < 1e-14);
        }
        let small = f_slope(1e-4).unwrap();
        assert!((small / 5e-5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn b1_arithmetic() {
        let p = BoundParams::new(1.0, 10.0);
        assert!((bound_b1(&p, 0.0) - 0.4).abs() < 1e-15);
        let expect = 0.4 + 2.0 * (libm::exp(0.2) - 1.0);
        assert!((bound_b1(&p, 1.0) - expect).abs() < 1e-14);
        let pm = p.with_multiband(true);
        assert!((bound_b1(&pm, 0.0) - FRAC_PI_2 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn b2_arithmetic() {
        let p = BoundParams::new(1.0, 10.0);
        assert!((bound_b2(&p, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let edge = BoundParams::new(0.5, 1.0);
        assert!(matches!(bound_b2(&edge, 0.0), Err(Error::GapTooSmall { .. })));
    }

    #[test]
    fn asymptotic_slopes() {
        let p = BoundParams::new(1.0, 1e6);
        let unit = p.v_norm * p.v_norm / p.gap;
        assert!((slope_b1(&p) / unit - 4.0).abs() < 1e-4);
        assert!((slope_b2(&p).unwrap() / unit - 2.0).abs() < 1e-4);
        let q = BoundParams::new(1.0, 100.0);
        assert!((bound_asymptotic(&q, 10.0) - 0.24).abs() < 1e-14);
        assert!((bound_asymptotic(&q, 0.0) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn crossover() {
        let x = slope_crossover();
        assert!((0.1882..=0.1892).contains(&x), "{x}");
        let at = |r: f64| BoundParams::new(r, 1.0);
        assert!(slope_b2(&at(0.1)).unwrap() < slope_b1(&at(0.1)));
        assert!(slope_b2(&at(0.3)).unwrap() > slope_b1(&at(0.3)));
    }

    #[test]
    fn single_state() {
        assert!((bound_single_state(&BoundParams::new(1.0, 10.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(bound_single_state(&BoundParams::new(1e-12, 1.0)).unwrap() < 1e-10);
        let near = bound_single_state(&BoundParams::new(0.49, 1.0)).unwrap();
        assert!(near.is_finite() && near > 100.0);
    }

    #[test]
    fn open_bound() {
        let p = BoundParams::new(0.01, 1.0).with_jumps(2.0);
        let expect = libm::expm1(0.02) * (1.0 + libm::exp(0.02));
        assert!((bound_open(&p, 0.0) - expect).abs() < 1e-15);
        assert!((bound_open(&p, 0.0) - 0.0408).abs() < 1e-3);
        assert_eq!(bound_open(&BoundParams::new(0.0, 1.0).with_jumps(2.0), 5.0), 0.0);
        // Slope of the asymptotic form is 4(1+c)||V||^2/Delta0.
        let s = bound_open_asymptotic(&p, 1.0) - bound_open_asymptotic(&p, 0.0);
        assert!((s - 4.0 * 3.0 * 1e-4).abs() < 1e-16);
    }

    #[test]
    fn polylog_small_orders() {
        let x: f64 = 0.3;
        let direct = |k: i32| (1..400).map(|n| libm::pow(n as f64, k as f64) * libm::pow(x, n as f64)).sum::<f64>();
        for k in 0..5 {
            assert!((polylog_neg(k, x) - direct(k as i32)).abs() < 1e-12 * direct(k as i32));
        }
    }

    fn chain_params() -> ManyBodyParams {
        ManyBodyParams {
            v_star: 1.0,
            gap: 100.0,
            w: 3,
            u: 3,
            velocity: 2.0,
            kappa: 0.7,
            x_size: 1,
            r_x: 0.0,
            l0: 1.0,
            ball: BallVolume::chain(),
        }
    }

    #[test]
    fn many_body_at_zero_time() {
        let p = chain_params();
        let expect = p.v_star / p.gap * 3.0 * (2.0 + p.p_tilde(0.0));
        assert!((bound_many_body(&p, 0.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn many_body_routes_agree() {
        let mut p = chain_params();
        for (x, rx) in [(1, 0.0), (3, 1.0), (5, 2.0)] {
            p.x_size = x;
            p.r_x = rx;
            for t in [0.0, 0.3, 2.0, 17.0] {
                let a = bound_many_body(&p, t).unwrap();
                let b = bound_many_body_1d_explicit(&p, t).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
        let mut q = chain_params();
        q.ball = BallVolume::triangular();
        assert!(bound_many_body_1d_explicit(&q, 1.0).is_err());
        assert!(bound_many_body(&q, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn many_body_grows_quadratically() {
        let p = chain_params();
        let (t1, t2) = (1e2, 1e4);
        let slope = (libm::log(bound_many_body(&p, t2).unwrap()) - libm::log(bound_many_body(&p, t1).unwrap()))
            / (libm::log(t2) - libm::log(t1));
        assert!((1.9..=2.1).contains(&slope), "{slope}");
    }

    #[test]
    fn vprime_local_limits() {
        let t_star = 1e-4;
        let lead = 4.0 * 3.0 * 3.0 * 1.0 * t_star;
        let v = vprime_local_from_t(3, 3, 1.0, t_star, 0.0).unwrap();
        assert!((v / lead - 1.0).abs() < 0.01);
        let mut p = chain_params();
        p.w = 3;
        assert!(bound_vprime_local(&p, 0.0).unwrap() > 0.0);
        // Boundary: Delta0 = 2 w (u-1) ||V||_*.
        p.gap = 12.0;
        assert!(matches!(bound_vprime_local(&p, 0.0), Err(Error::ConvergenceViolated { .. })));
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(BallVolume::chain().eval(3.0), 7.0);
        assert_eq!(BallVolume::triangular().eval(1.0), 7.0);
        assert_eq!(BallVolume::cubic().dimension(), 3);
    }
}
