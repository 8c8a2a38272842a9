//! One-parameter sweeps over a config template.

use std::path::PathBuf;

use crate::config::ScenarioConfig;
use crate::csv_trace::{fmt_f64, Cell, CsvTrace};
use crate::error::CliError;
use crate::scenarios::{execute, metric_name, sibling_path};

/// Outcome of one sweep member.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub value: String,
    pub output: PathBuf,
    /// `Err` holds the error message; the sweep continues past failures.
    pub result: Result<(f64, Vec<f64>), String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub axis: String,
    pub runs: Vec<SweepRun>,
    /// Largest sup-norm distance between the curves of any two successful
    /// runs with equal grids; `None` with fewer than two such runs.
    pub max_curve_deviation: Option<f64>,
    pub summary: CsvTrace,
    pub summary_path: PathBuf,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    (a.len() == b.len() && !a.is_empty()).then(|| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

fn value_label(raw: &str) -> String {
    raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// Runs `template` once per value of `axis`, writing each run to
/// `<stem>_<axis>_<value>.csv` and the summary to `<stem>_<axis>_summary.csv`.
///
/// Summary columns: the axis value, `status` (`ok` or `failed: ...`), the
/// scenario metric, and `max_curve_deviation`, the largest sup-norm distance
/// from this run's curve to any other successful run's curve.
pub fn sweep(template: &ScenarioConfig, axis: &str, values: &[String]) -> Result<SweepReport, CliError> {
    if !template.parameters.contains_key(axis) {
        return Err(CliError::Config { key: axis.into(), message: "sweep axis is not set in the template".into() });
    }
    let sc = template.scenario()?;
    let base = template.resolved_output();
    let mut runs = Vec::with_capacity(values.len());
    for value in values {
        let mut cfg = template.clone();
        cfg.parameters.insert(axis.into(), value.clone());
        let output = sibling_path(&base, &format!("{axis}_{}", value_label(value)));
        cfg.output_path = output.clone();
        let result = match execute(&cfg) {
            Ok((out, _)) => Ok((out.summary.metric, out.summary.curve)),
            Err(e) => Err(e.to_string()),
        };
        runs.push(SweepRun { value: value.clone(), output, result });
    }

    let curves: Vec<Option<&Vec<f64>>> = runs.iter().map(|r| r.result.as_ref().ok().map(|(_, c)| c)).collect();
    let deviation_of = |i: usize| -> Option<f64> {
        let mine = curves[i]?;
        curves
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .filter_map(|(_, other)| other.and_then(|o| sup_distance(mine, o)))
            .reduce(f64::max)
    };
    let mut summary = CsvTrace::new(&[axis, "status", metric_name(sc), "max_curve_deviation"]);
    let mut max_curve_deviation: Option<f64> = None;
    for (i, run) in runs.iter().enumerate() {
        let value_cell = match run.value.parse::<f64>() {
            Ok(x) => Cell::Text(fmt_f64(x)),
            Err(_) => Cell::Text(run.value.clone()),
        };
        let dev = deviation_of(i);
        if let Some(d) = dev {
            max_curve_deviation = Some(max_curve_deviation.map_or(d, |m: f64| m.max(d)));
        }
        let num = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Num);
        let row = match &run.result {
            Ok((metric, _)) => vec![value_cell, Cell::from("ok"), Cell::Num(*metric), num(dev)],
            Err(msg) => vec![value_cell, Cell::Text(format!("failed: {msg}")), Cell::from(""), Cell::from("")],
        };
        summary.push(row)?;
    }
    let summary_path = sibling_path(&base, &format!("{axis}_summary"));
    summary.write(&summary_path)?;
    Ok(SweepReport { axis: axis.into(), runs, max_curve_deviation, summary, summary_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_distance_needs_equal_grids() {
        assert_eq!(sup_distance(&[1.0, 2.0], &[1.5, 1.0]), Some(1.0));
        assert_eq!(sup_distance(&[1.0], &[1.0, 2.0]), None);
        assert_eq!(sup_distance(&[], &[]), None);
    }

    #[test]
    fn labels_are_file_safe() {
        assert_eq!(value_label("0.5"), "0.5");
        assert_eq!(value_label("1e-3"), "1e-3");
        assert_eq!(value_label("a/b c"), "a_b_c");
    }
}
