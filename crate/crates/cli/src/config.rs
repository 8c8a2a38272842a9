//! Flat `key = value` scenario files.
//!
//! Blank lines and lines starting with `#` are ignored. Two keys are
//! structural: `scenario` selects the experiment and `output` names the
//! primary CSV file. Everything else is a scenario parameter.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

/// Environment variable that redirects every output file into a directory.
pub const OUTPUT_DIR_ENV: &str = "SWBOUND_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    ClosedBound,
    SingleState,
    PxpLightcone,
    PxpCollapse,
    ZenoExample1,
    ZenoExample2,
    BoundTables,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::ClosedBound,
        Scenario::SingleState,
        Scenario::PxpLightcone,
        Scenario::PxpCollapse,
        Scenario::ZenoExample1,
        Scenario::ZenoExample2,
        Scenario::BoundTables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClosedBound => "closed-bound",
            Scenario::SingleState => "single-state",
            Scenario::PxpLightcone => "pxp-lightcone",
            Scenario::PxpCollapse => "pxp-collapse",
            Scenario::ZenoExample1 => "zeno-example1",
            Scenario::ZenoExample2 => "zeno-example2",
            Scenario::BoundTables => "bound-tables",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

/// A parsed but not yet validated scenario file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Raw `scenario` value; checked by [`validate_config`].
    pub scenario: String,
    pub parameters: BTreeMap<String, String>,
    pub output_path: PathBuf,
}

/// One problem found by [`validate_config`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub key: String,
    pub constraint: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.constraint)
    }
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, output_path: impl Into<PathBuf>) -> Self {
        Self { scenario: scenario.name().into(), parameters: BTreeMap::new(), output_path: output_path.into() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut scenario = None;
        let mut output = None;
        let mut parameters = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: idx + 1,
                message: format!("expected 'key = value', found '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::Syntax { line: idx + 1, message: "empty key".into() });
            }
            let slot = match key {
                "scenario" => scenario.replace(value.to_string()).is_some(),
                "output" => output.replace(PathBuf::from(value)).is_some(),
                _ => parameters.insert(key.to_string(), value.to_string()).is_some(),
            };
            if slot {
                return Err(CliError::Syntax { line: idx + 1, message: format!("duplicate key '{key}'") });
            }
        }
        let scenario =
            scenario.ok_or_else(|| CliError::Config { key: "scenario".into(), message: "missing".into() })?;
        let output_path = output.unwrap_or_else(|| PathBuf::from(format!("{scenario}.csv")));
        Ok(Self { scenario, parameters, output_path })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        self.scenario.parse().map_err(|m| CliError::Config { key: "scenario".into(), message: m })
    }

    /// Output path after applying the [`OUTPUT_DIR_ENV`] override.
    pub fn resolved_output(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => {
                let name = self.output_path.file_name().map(PathBuf::from).unwrap_or_else(|| "out.csv".into());
                PathBuf::from(dir).join(name)
            }
            _ => self.output_path.clone(),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_key(self, key)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        parse_key(self, key)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.usize(key),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        parse_key(self, key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }
}

fn parse_key<T: FromStr>(cfg: &ScenarioConfig, key: &str) -> Result<T, CliError> {
    let raw = cfg.raw(key).ok_or_else(|| CliError::Config { key: key.into(), message: "missing".into() })?;
    raw.parse().map_err(|_| CliError::Config {
        key: key.into(),
        message: format!("cannot parse '{raw}' as {}", type_label::<T>()),
    })
}

fn type_label<T>() -> &'static str {
    let name = std::any::type_name::<T>();
    if name.contains("f64") {
        "a number"
    } else {
        "a nonnegative integer"
    }
}

/// How a parameter is checked.
#[derive(Clone, Copy, Debug)]
enum Rule {
    Positive,
    Finite,
    /// Integer in an inclusive range.
    Int(usize, usize),
    Seed,
    /// Number strictly inside an open interval.
    Open(f64, f64),
    Choice(&'static [&'static str]),
}

struct Param {
    key: &'static str,
    rule: Rule,
    required: bool,
}

const fn req(key: &'static str, rule: Rule) -> Param {
    Param { key, rule, required: true }
}

const fn opt(key: &'static str, rule: Rule) -> Param {
    Param { key, rule, required: false }
}

/// Largest chain the dense simulator accepts.
pub const MAX_CHAIN: usize = 12;

const OBSERVABLES: &[&str] = &["x", "y", "z"];

fn schema(sc: Scenario, cfg: &ScenarioConfig) -> Vec<Param> {
    use Rule::*;
    let time = [req("t_max", Positive), req("dt", Positive)];
    match sc {
        Scenario::ClosedBound => {
            let mut p = vec![opt("model", Choice(&["two-level", "random"]))];
            if cfg.raw("model") == Some("random") {
                p.push(req("seed", Seed));
            } else {
                p.extend([req("delta0", Positive), req("omega", Finite), opt("observable", Choice(OBSERVABLES))]);
            }
            p.extend(time);
            p
        }
        Scenario::SingleState => {
            let mut p = vec![req("delta0", Positive), req("omega", Finite), opt("observable", Choice(OBSERVABLES))];
            p.extend(time);
            p
        }
        Scenario::PxpLightcone => {
            let mut p = vec![
                req("N", Int(3, MAX_CHAIN)),
                req("delta0", Positive),
                req("omega", Finite),
                opt("threshold", Open(0.0, 2.0)),
            ];
            p.extend(time);
            p
        }
        Scenario::PxpCollapse => vec![
            req("N", Int(2, MAX_CHAIN)),
            req("delta0", Positive),
            req("omega", Positive),
            opt("site_x", Int(1, MAX_CHAIN)),
            opt("site_y", Int(1, MAX_CHAIN)),
            opt("scaled_t_max", Positive),
            opt("scaled_dt", Positive),
        ],
        Scenario::ZenoExample1 | Scenario::ZenoExample2 => {
            let mut p = vec![req("delta0", Positive), req("omega", Finite), opt("step", Positive)];
            p.extend(time);
            p
        }
        Scenario::BoundTables => vec![
            opt("x_min", Open(0.0, 0.5)),
            opt("x_max", Open(0.0, 0.5)),
            opt("x_count", Int(2, 100_000)),
            opt("v_norm", Positive),
        ],
    }
}

fn check(rule: Rule, raw: &str) -> Option<String> {
    let num = || raw.parse::<f64>().ok().filter(|x| !x.is_nan());
    match rule {
        Rule::Positive => match num() {
            Some(x) if x > 0.0 && x.is_finite() => None,
            _ => Some(format!("must be a positive number, got '{raw}'")),
        },
        Rule::Finite => match num() {
            Some(x) if x.is_finite() => None,
            _ => Some(format!("must be a finite number, got '{raw}'")),
        },
        Rule::Int(lo, hi) => match raw.parse::<usize>() {
            Ok(n) if (lo..=hi).contains(&n) => None,
            _ => Some(format!("must be an integer in {lo}..={hi}, got '{raw}'")),
        },
        Rule::Seed => match raw.parse::<u64>() {
            Ok(_) => None,
            Err(_) => Some(format!("must be an unsigned 64-bit integer, got '{raw}'")),
        },
        Rule::Open(lo, hi) => match num() {
            Some(x) if x > lo && x < hi => None,
            _ => Some(format!("must lie strictly between {lo} and {hi}, got '{raw}'")),
        },
        Rule::Choice(options) => {
            if options.contains(&raw) {
                None
            } else {
                Some(format!("must be one of {}, got '{raw}'", options.join(", ")))
            }
        }
    }
}

/// Every problem that would make [`crate::run_scenario`] reject `cfg`.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<Issue> {
    let mut issues = Vec::new();
    let issue = |key: &str, constraint: String| Issue { key: key.into(), constraint };
    let sc = match cfg.scenario() {
        Ok(sc) => sc,
        Err(_) => {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
            issues.push(issue("scenario", format!("must be one of {}, got '{}'", names.join(", "), cfg.scenario)));
            return issues;
        }
    };
    let params = schema(sc, cfg);
    for p in &params {
        match cfg.raw(p.key) {
            None if p.required => issues.push(issue(p.key, "required".into())),
            None => {}
            Some(raw) => {
                if let Some(msg) = check(p.rule, raw) {
                    issues.push(issue(p.key, msg));
                }
            }
        }
    }
    for key in cfg.parameters.keys() {
        if !params.iter().any(|p| p.key == key) {
            issues.push(issue(key, format!("not a parameter of {sc}")));
        }
    }
    if !issues.is_empty() {
        return issues;
    }
    // Cross-field constraints, only once every field parses.
    let f = |k: &str| cfg.raw(k).and_then(|v| v.parse::<f64>().ok());
    if let (Some(t_max), Some(dt)) = (f("t_max"), f("dt")) {
        if dt > t_max {
            issues.push(issue("dt", format!("must not exceed t_max ({t_max})")));
        } else if t_max / dt > 1e7 {
            issues.push(issue("dt", "gives more than 10^7 samples".into()));
        }
    }
    match sc {
        Scenario::SingleState => {
            if let (Some(d), Some(w)) = (f("delta0"), f("omega")) {
                if w.abs() >= d {
                    issues.push(issue("omega", format!("|omega| must be below delta0 ({d}) for the bound to apply")));
                }
            }
        }
        Scenario::PxpCollapse => {
            let n = cfg.raw("N").and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
            for key in ["site_x", "site_y"] {
                if let Some(s) = cfg.raw(key).and_then(|v| v.parse::<usize>().ok()) {
                    if s > n {
                        issues.push(issue(key, format!("must not exceed N ({n})")));
                    }
                }
            }
            if cfg.raw("site_y").is_none() && n < 6 {
                issues.push(issue("N", "must be at least 6 when site_y takes its default 6".into()));
            }
        }
        Scenario::BoundTables => {
            if f("x_min").unwrap_or(DEFAULT_X_MIN) >= f("x_max").unwrap_or(DEFAULT_X_MAX) {
                issues.push(issue("x_min", "must be below x_max".into()));
            }
        }
        _ => {}
    }
    issues
}

pub const DEFAULT_X_MIN: f64 = 0.01;
pub const DEFAULT_X_MAX: f64 = 0.45;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let cfg = ScenarioConfig::parse(
            "# comment\nscenario = pxp-lightcone\n\nN = 10\n delta0=10 \nomega = 2\noutput = out/lc.csv\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario().unwrap(), Scenario::PxpLightcone);
        assert_eq!(cfg.raw("delta0"), Some("10"));
        assert_eq!(cfg.output_path, PathBuf::from("out/lc.csv"));
        assert_eq!(cfg.usize("N").unwrap(), 10);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = ScenarioConfig::parse("scenario = single-state\nbroken line\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 2, .. }));
        let err = ScenarioConfig::parse("scenario = a\nscenario = b\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 2, .. }));
        assert!(matches!(ScenarioConfig::parse("N = 3\n").unwrap_err(), CliError::Config { .. }));
    }

    #[test]
    fn default_output_follows_scenario() {
        let cfg = ScenarioConfig::parse("scenario = bound-tables").unwrap();
        assert_eq!(cfg.output_path, PathBuf::from("bound-tables.csv"));
    }

    fn keys(issues: &[Issue]) -> Vec<&str> {
        issues.iter().map(|i| i.key.as_str()).collect()
    }

    #[test]
    fn missing_chain_length_is_reported() {
        let cfg = ScenarioConfig::new(Scenario::PxpLightcone, "x.csv")
            .with("delta0", 10)
            .with("omega", 2)
            .with("t_max", 5)
            .with("dt", 0.1);
        assert_eq!(keys(&validate_config(&cfg)), vec!["N"]);
    }

    #[test]
    fn nonpositive_gap_is_reported() {
        let cfg = ScenarioConfig::new(Scenario::ZenoExample1, "x.csv")
            .with("delta0", 0)
            .with("omega", 0.05)
            .with("t_max", 40)
            .with("dt", 0.1);
        let issues = validate_config(&cfg);
        assert_eq!(keys(&issues), vec!["delta0"]);
        assert!(issues[0].constraint.contains("positive"));
    }

    #[test]
    fn complete_config_has_no_issues() {
        let cfg = ScenarioConfig::new(Scenario::ZenoExample2, "x.csv")
            .with("delta0", 1)
            .with("omega", 0.05)
            .with("t_max", 400)
            .with("dt", 1);
        assert!(validate_config(&cfg).is_empty());
        assert!(validate_config(&ScenarioConfig::new(Scenario::BoundTables, "b.csv")).is_empty());
    }

    #[test]
    fn unknown_keys_and_scenarios_are_reported() {
        let cfg = ScenarioConfig::new(Scenario::BoundTables, "b.csv").with("delta", 3);
        assert_eq!(keys(&validate_config(&cfg)), vec!["delta"]);
        let mut bad = cfg.clone();
        bad.scenario = "no-such-scenario".into();
        assert_eq!(keys(&validate_config(&bad)), vec!["scenario"]);
    }

    #[test]
    fn cross_field_constraints() {
        let cfg = ScenarioConfig::new(Scenario::SingleState, "s.csv")
            .with("delta0", 1)
            .with("omega", 2)
            .with("t_max", 1)
            .with("dt", 2);
        assert_eq!(keys(&validate_config(&cfg)), vec!["dt", "omega"]);
        let cfg = ScenarioConfig::new(Scenario::PxpCollapse, "c.csv").with("N", 4).with("delta0", 10).with("omega", 2);
        assert_eq!(keys(&validate_config(&cfg)), vec!["N"]);
        let cfg = cfg.with("site_y", 5);
        assert_eq!(keys(&validate_config(&cfg)), vec!["site_y"]);
        let cfg = ScenarioConfig::new(Scenario::BoundTables, "b.csv").with("x_min", 0.3).with("x_max", 0.2);
        assert_eq!(keys(&validate_config(&cfg)), vec!["x_min"]);
    }

    #[test]
    fn random_model_requires_a_seed() {
        let cfg = ScenarioConfig::new(Scenario::ClosedBound, "c.csv")
            .with("model", "random")
            .with("t_max", 1)
            .with("dt", 0.1);
        assert_eq!(keys(&validate_config(&cfg)), vec!["seed"]);
        let cfg = cfg.with("seed", "-4");
        assert_eq!(keys(&validate_config(&cfg)), vec!["seed"]);
    }
}
