//! Named experiments. Each scenario turns a validated config into one or more
//! CSV tables plus a single summary scalar used by sweeps.

use std::path::{Path, PathBuf};

use swbound_core::closed::{
    commutator_growth, epsilon_closed, epsilon_single_state, first_crossings, light_cone, velocity_extract, ErrorTrace,
};
use swbound_core::ensemble::closed_instance;
use swbound_core::lattice::{build_pxp, interaction_norm, pauli_y_site};
use swbound_core::linalg::pauli;
use swbound_core::open::{build_example1, build_example2, epsilon_open, saturation_value, slope_fit};
use swbound_core::swt::{band_split, intercept_b1, intercept_b2, slope_b1, slope_b2, slope_crossover, BoundParams};
use swbound_core::OperatorMatrix;

use crate::config::{validate_config, Scenario, ScenarioConfig, DEFAULT_X_MAX, DEFAULT_X_MIN};
use crate::csv_trace::{Cell, CsvTrace};
use crate::error::CliError;

/// Result of one scenario run.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    /// Written to the config's output path.
    pub primary: CsvTrace,
    /// Written next to the primary file as `<stem>_<suffix>.csv`.
    pub extra: Vec<(&'static str, CsvTrace)>,
    pub summary: RunSummary,
}

/// The scalar a sweep aggregates, plus the curve used for collapse checks.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub metric_name: &'static str,
    /// NaN when the metric is undefined for this run (for example no
    /// threshold crossings).
    pub metric: f64,
    /// Values on the scenario's natural grid; compared across sweep members.
    pub curve: Vec<f64>,
    /// Samples where a rigorous bound column lies below epsilon.
    pub bound_violations: usize,
}

/// Name of the summary scalar each scenario reports.
pub fn metric_name(sc: Scenario) -> &'static str {
    match sc {
        Scenario::ClosedBound | Scenario::SingleState => "max_epsilon",
        Scenario::PxpLightcone => "velocity",
        Scenario::PxpCollapse => "final_commutator_norm",
        Scenario::ZenoExample1 => "saturation",
        Scenario::ZenoExample2 => "slope",
        Scenario::BoundTables => "crossover",
    }
}

fn sim(sc: Scenario) -> impl Fn(swbound_core::Error) -> CliError {
    move |source| CliError::Simulation { scenario: sc.name(), source }
}

/// `0, dt, 2dt, ...` up to `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

fn observable(cfg: &ScenarioConfig) -> OperatorMatrix {
    match cfg.str_or("observable", "x") {
        "y" => pauli::y(),
        "z" => pauli::z(),
        _ => pauli::x(),
    }
}

/// `H0 = diag(0, delta0)` and `V = (omega/2) sigma^x`.
fn two_level(cfg: &ScenarioConfig) -> Result<(OperatorMatrix, OperatorMatrix), CliError> {
    let delta0 = cfg.f64("delta0")?;
    let omega = cfg.f64("omega")?;
    Ok((OperatorMatrix::diag_real(&[0.0, delta0]), pauli::x().scale_real(omega / 2.0)))
}

/// Trace columns in a fixed order; missing bounds are written as empty cells.
fn trace_table(tr: &ErrorTrace, columns: &[&str]) -> Result<(CsvTrace, usize), CliError> {
    let mut header = vec!["t", "epsilon"];
    header.extend_from_slice(columns);
    let mut table = CsvTrace::new(&header);
    for k in 0..tr.len() {
        let mut row = vec![Cell::Num(tr.times[k]), Cell::Num(tr.epsilon[k])];
        for name in columns {
            row.push(match tr.bound(name) {
                Some(b) => Cell::Num(b.values[k]),
                None => Cell::Text(String::new()),
            });
        }
        table.push(row)?;
    }
    let violations = tr.bounds.iter().filter(|b| b.rigorous).filter_map(|b| tr.violations(b.name, 0.0)).sum();
    Ok((table, violations))
}

fn trace_output(sc: Scenario, tr: &ErrorTrace, columns: &[&str], metric: f64) -> Result<ScenarioOutput, CliError> {
    let (primary, bound_violations) = trace_table(tr, columns)?;
    Ok(ScenarioOutput {
        scenario: sc,
        primary,
        extra: Vec::new(),
        summary: RunSummary { metric_name: metric_name(sc), metric, curve: tr.epsilon.clone(), bound_violations },
    })
}

/// Validates `cfg` and runs it. Nothing is written.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let issues = validate_config(cfg);
    if !issues.is_empty() {
        return Err(CliError::Invalid(issues.iter().map(ToString::to_string).collect()));
    }
    let sc = cfg.scenario()?;
    let err = sim(sc);
    match sc {
        Scenario::ClosedBound => {
            let times = time_grid(cfg.f64("t_max")?, cfg.f64("dt")?);
            let tr = if cfg.str_or("model", "two-level") == "random" {
                let inst = closed_instance(cfg.u64("seed")?).map_err(&err)?;
                epsilon_closed(&inst.h0, &inst.v, &inst.split, &inst.o, &times)
            } else {
                let (h0, v) = two_level(cfg)?;
                let delta0 = cfg.f64("delta0")?;
                let split = band_split(&h0, (-0.5 * delta0, 0.5 * delta0)).map_err(&err)?;
                epsilon_closed(&h0, &v, &split, &observable(cfg), &times)
            }
            .map_err(&err)?;
            let m = tr.max_epsilon();
            trace_output(sc, &tr, &["b1", "b2", "asymptotic"], m)
        }
        Scenario::SingleState => {
            let times = time_grid(cfg.f64("t_max")?, cfg.f64("dt")?);
            let (h0, v) = two_level(cfg)?;
            let tr = epsilon_single_state(&h0, &v, 0, &observable(cfg), &times).map_err(&err)?;
            let m = tr.max_epsilon();
            trace_output(sc, &tr, &["const_bound"], m)
        }
        Scenario::PxpLightcone => pxp_lightcone(cfg),
        Scenario::PxpCollapse => pxp_collapse(cfg),
        Scenario::ZenoExample1 | Scenario::ZenoExample2 => {
            let times = time_grid(cfg.f64("t_max")?, cfg.f64("dt")?);
            let (delta0, omega) = (cfg.f64("delta0")?, cfg.f64("omega")?);
            let (m, o) = if sc == Scenario::ZenoExample1 {
                build_example1(delta0, omega)
            } else {
                build_example2(delta0, omega)
            }
            .map_err(&err)?;
            let step = cfg.f64_or("step", m.default_step())?;
            let tr = epsilon_open(&m, &o, &times, step).map_err(&err)?;
            let metric = if sc == Scenario::ZenoExample1 {
                saturation_value(&tr).unwrap_or(f64::NAN)
            } else if omega != 0.0 {
                slope_fit(&tr, (2.0 / omega.abs(), 20.0 / omega.abs())).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            trace_output(sc, &tr, &["bound_exact", "bound_asymptotic"], metric)
        }
        Scenario::BoundTables => bound_tables(cfg),
    }
}

fn pxp_lightcone(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let sc = Scenario::PxpLightcone;
    let err = sim(sc);
    let n = cfg.usize("N")?;
    let threshold = cfg.f64_or("threshold", 1.0)?;
    let times = time_grid(cfg.f64("t_max")?, cfg.f64("dt")?);
    let (h0, v) = build_pxp(n, cfg.f64("delta0")?, cfg.f64("omega")?).map_err(&err)?;
    let h = &h0.total() + &v.total();
    let o_x = pauli_y_site(1, n).map_err(&err)?;
    let grid = light_cone(&h, &o_x, n, &times).map_err(&err)?;
    let mut primary = CsvTrace::new(&["t", "site", "commutator_norm"]);
    for (t, row) in grid.times.iter().zip(&grid.commutator_norms) {
        for (site, c) in grid.sites.iter().zip(row) {
            primary.push(vec![Cell::Num(*t), Cell::from(*site), Cell::Num(*c)])?;
        }
    }
    let mut crossings = CsvTrace::new(&["site", "crossing_time"]);
    for (site, t) in first_crossings(&grid, threshold) {
        crossings.push(vec![Cell::from(site), Cell::Num(t)])?;
    }
    let velocity = velocity_extract(&grid, threshold).map(|f| f.velocity).unwrap_or(f64::NAN);
    let curve = grid.commutator_norms.iter().map(|row| row[n - 1]).collect();
    Ok(ScenarioOutput {
        scenario: sc,
        primary,
        extra: vec![("crossings", crossings)],
        summary: RunSummary { metric_name: metric_name(sc), metric: velocity, curve, bound_violations: 0 },
    })
}

fn pxp_collapse(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let sc = Scenario::PxpCollapse;
    let err = sim(sc);
    let n = cfg.usize("N")?;
    let site_x = cfg.usize_or("site_x", 1)?;
    let site_y = cfg.usize_or("site_y", 6)?;
    let scaled = time_grid(cfg.f64_or("scaled_t_max", 2.0)?, cfg.f64_or("scaled_dt", 0.05)?);
    let (h0, v) = build_pxp(n, cfg.f64("delta0")?, cfg.f64("omega")?).map_err(&err)?;
    let v_star = interaction_norm(&v, 0.0);
    let times: Vec<f64> = scaled.iter().map(|s| s / v_star).collect();
    let h = &h0.total() + &v.total();
    let o_x = pauli_y_site(site_x, n).map_err(&err)?;
    let o_y = pauli_y_site(site_y, n).map_err(&err)?;
    let norms = commutator_growth(&h, &o_x, &o_y, &times).map_err(&err)?;
    let mut primary = CsvTrace::new(&["t", "scaled_t", "commutator_norm"]);
    for ((t, s), c) in times.iter().zip(&scaled).zip(&norms) {
        primary.push_nums(&[*t, *s, *c])?;
    }
    let last = norms.last().copied().unwrap_or(f64::NAN);
    Ok(ScenarioOutput {
        scenario: sc,
        primary,
        extra: Vec::new(),
        summary: RunSummary { metric_name: metric_name(sc), metric: last, curve: norms, bound_violations: 0 },
    })
}

fn bound_tables(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let sc = Scenario::BoundTables;
    let err = sim(sc);
    let lo = cfg.f64_or("x_min", DEFAULT_X_MIN)?;
    let hi = cfg.f64_or("x_max", DEFAULT_X_MAX)?;
    let count = cfg.usize_or("x_count", 45)?;
    let v_norm = cfg.f64_or("v_norm", 1.0)?;
    let mut primary = CsvTrace::new(&["x", "slope_b1", "slope_b2", "intercept_b1", "intercept_b2"]);
    let mut gaps = Vec::with_capacity(count);
    for k in 0..count {
        let x = lo + (hi - lo) * k as f64 / (count - 1) as f64;
        let p = BoundParams::new(v_norm, v_norm / x);
        let s1 = slope_b1(&p);
        let s2 = slope_b2(&p).map_err(&err)?;
        primary.push_nums(&[x, s1, s2, intercept_b1(&p), intercept_b2(&p).map_err(&err)?])?;
        gaps.push(s1 - s2);
    }
    Ok(ScenarioOutput {
        scenario: sc,
        primary,
        extra: Vec::new(),
        summary: RunSummary {
            metric_name: metric_name(sc),
            metric: slope_crossover(),
            curve: gaps,
            bound_violations: 0,
        },
    })
}

/// `<dir>/<stem>_<suffix>.csv` for an output path `<dir>/<stem>.<ext>`.
pub fn sibling_path(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    primary.with_file_name(format!("{stem}_{suffix}.csv"))
}

impl ScenarioOutput {
    /// Writes the primary table to `path` and the extra tables next to it.
    /// Returns every path written.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>, CliError> {
        self.primary.write(path)?;
        let mut written = vec![path.to_path_buf()];
        for (suffix, table) in &self.extra {
            let p = sibling_path(path, suffix);
            table.write(&p)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Runs `cfg` and writes its tables to the resolved output path.
pub fn execute(cfg: &ScenarioConfig) -> Result<(ScenarioOutput, Vec<PathBuf>), CliError> {
    let out = run_scenario(cfg)?;
    let written = out.write(&cfg.resolved_output())?;
    Ok((out, written))
}
