//! Fast invariant suite behind the `selftest` subcommand.
//!
//! Every check runs on small seeded instances so the whole suite finishes in
//! a few seconds.

use swbound_core::closed::{
    commutator_norms, epsilon_closed, epsilon_single_state, lr_bound_eval, verify_swt_identities,
};
use swbound_core::ensemble::{closed_ensemble, open_ensemble};
use swbound_core::lattice::{build_pxp, interaction_norm, pauli_y_site, w_constant, SupportSet};
use swbound_core::linalg::{op_norm, pauli};
use swbound_core::open::{epsilon_open, evolve_open};
use swbound_core::swt::{
    bound_many_body, bound_many_body_1d_explicit, slope_crossover, BallVolume, LiebRobinsonParams, ManyBodyParams,
    SwtVariant,
};
use swbound_core::OperatorMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type CheckResult = Result<(bool, String), swbound_core::Error>;

fn crossover() -> CheckResult {
    let x = slope_crossover();
    Ok(((0.1882..=0.1892).contains(&x), format!("x = {x:.6}")))
}

fn closed_bounds() -> CheckResult {
    let mut bad = 0;
    let mut over_two = 0;
    for inst in closed_ensemble(0x5e1f, 25)? {
        let v_norm = op_norm(&inst.v);
        let times: Vec<f64> = (0..30).map(|k| k as f64 * 0.5 / v_norm).collect();
        let tr = epsilon_closed(&inst.h0, &inst.v, &inst.split, &inst.o, &times)?;
        bad += tr.violations("b1", 0.0).unwrap_or(0) + tr.violations("b2", 0.0).unwrap_or(0);
        over_two += tr.epsilon.iter().filter(|&&e| e > 2.0 + 1e-12).count();
    }
    Ok((bad == 0 && over_two == 0, format!("{bad} bound violations, {over_two} samples above 2")))
}

fn swt_identities() -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for inst in closed_ensemble(0x5e1f, 25)? {
        let v_norm = op_norm(&inst.v);
        for variant in [SwtVariant::ClosedH0, SwtVariant::ClosedH1] {
            let r = verify_swt_identities(&inst.h0, &inst.v, &inst.split, variant, &inst.o)?;
            let dual = r.decomposition_agreement.unwrap_or(0.0);
            pass &= r.generator_residual <= 1e-10 * v_norm
                && (r.t_norm - r.t_pq_norm).abs() <= 1e-9
                && r.conjugation_residual <= r.tail_estimate + 1e-9
                && dual <= 1e-8;
            worst = worst.max(dual);
        }
    }
    Ok((pass, format!("max dual-route difference {worst:.2e}")))
}

fn single_state() -> CheckResult {
    let h0 = OperatorMatrix::diag_real(&[0.0, 10.0]);
    let v = pauli::x().scale_real(0.25);
    let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.05).collect();
    let tr = epsilon_single_state(&h0, &v, 0, &pauli::x(), &times)?;
    Ok((tr.violations("const_bound", 0.0) == Some(0), format!("sup epsilon {:.3e}", tr.max_epsilon())))
}

fn open_invariants() -> CheckResult {
    let (mut bad, mut unital, mut growth) = (0, 0.0f64, f64::NEG_INFINITY);
    for inst in open_ensemble(0x0be1, 10)? {
        let m = &inst.model;
        let times: Vec<f64> = (0..10).map(|k| k as f64 * 0.5 / op_norm(m.v())).collect();
        let step = m.default_step();
        bad += epsilon_open(m, &inst.o, &times, step)?.violations("bound_exact", 0.0).unwrap_or(0);
        let id = OperatorMatrix::identity(m.dim());
        for it in evolve_open(m, &id, &times, step)? {
            unital = unital.max(op_norm(&(&it - &id)));
        }
        for ot in evolve_open(m, &inst.o, &times, step)? {
            growth = growth.max(op_norm(&ot) - op_norm(&inst.o));
        }
    }
    let pass = bad == 0 && unital <= 1e-10 && growth <= 1e-10;
    Ok((pass, format!("{bad} bound violations, unitality {unital:.1e}, norm growth {growth:.1e}")))
}

fn light_cone() -> CheckResult {
    let n = 6;
    let (h0, v) = build_pxp(n, 10.0, 1.0)?;
    let params = LiebRobinsonParams::chain(0.5, 0.5, interaction_norm(&v, 1.0), w_constant(&h0), 1.0);
    let h = &h0.total() + &v.total();
    let ys: Vec<_> = (1..=n).map(|j| pauli_y_site(j, n)).collect::<Result<_, _>>()?;
    let times = [0.0, 0.5, 1.0, 2.0];
    let grid = commutator_norms(&h, &pauli_y_site(1, n)?, &ys, &times)?;
    let x = SupportSet::single(1, n)?;
    let mut bad = 0;
    for (row, &t) in grid.iter().zip(&times) {
        for (j, &c) in row.iter().enumerate() {
            let bound = lr_bound_eval(&params, &x, &SupportSet::single(j + 1, n)?, t)?;
            bad += usize::from(c > 2.0 + 1e-12 || c > bound);
        }
    }
    Ok((bad == 0, format!("{bad} grid points above the Lieb-Robinson bound or 2")))
}

fn many_body_routes() -> CheckResult {
    let mut worst: f64 = 0.0;
    for kappa in [0.5, 1.0] {
        for x_size in [1, 2] {
            let p = ManyBodyParams {
                v_star: 0.5,
                gap: 10.0,
                w: 2,
                u: 2,
                velocity: 3.0,
                kappa,
                x_size,
                r_x: 1.0,
                l0: 1.0,
                ball: BallVolume::chain(),
            };
            for t in [0.0, 1.0, 5.0] {
                let a = bound_many_body(&p, t)?;
                let b = bound_many_body_1d_explicit(&p, t)?;
                worst = worst.max((a - b).abs() / b);
            }
        }
    }
    Ok((worst <= 1e-9, format!("max relative difference {worst:.1e}")))
}

/// Runs every check; errors count as failures.
pub fn run() -> Vec<Check> {
    let checks: [(&'static str, fn() -> CheckResult); 7] = [
        ("slope crossover", crossover),
        ("closed bounds on random instances", closed_bounds),
        ("Schrieffer-Wolff identities", swt_identities),
        ("single-state bound", single_state),
        ("open-system invariants", open_invariants),
        ("Lieb-Robinson dominance", light_cone),
        ("many-body bound routes", many_body_routes),
    ];
    checks
        .iter()
        .map(|(name, f)| match f() {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check { name, pass: false, detail: format!("error: {e}") },
        })
        .collect()
}
