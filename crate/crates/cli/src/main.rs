use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use swbound::{execute, selftest, sweep, validate_config, ScenarioConfig};

#[derive(Parser)]
#[command(name = "swbound", version, about = "Constrained-dynamics error experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated list; may be empty.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        values: String,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Run the built-in invariant checks.
    Selftest,
}

fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    ScenarioConfig::from_file(path).with_context(|| format!("reading {}", path.display()))
}

fn fmt_metric(x: f64) -> String {
    if x.is_nan() {
        "undefined".into()
    } else {
        format!("{x:.6e}")
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let (out, written) = execute(&cfg)?;
            for p in &written {
                println!("wrote {}", p.display());
            }
            println!("{} = {}", out.summary.metric_name, fmt_metric(out.summary.metric));
            if out.summary.bound_violations > 0 {
                println!("rigorous bound violated at {} samples", out.summary.bound_violations);
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, axis, values } => {
            let cfg = load(&config)?;
            let values: Vec<String> =
                values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
            let report = sweep(&cfg, &axis, &values)?;
            for r in &report.runs {
                match &r.result {
                    Ok((m, _)) => println!("{axis} = {}: {}", r.value, fmt_metric(*m)),
                    Err(e) => println!("{axis} = {}: failed: {e}", r.value),
                }
            }
            if let Some(d) = report.max_curve_deviation {
                println!("max curve deviation {d:.6e}");
            }
            println!("wrote {}", report.summary_path.display());
            Ok(if report.failures() == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let issues = validate_config(&cfg);
            if issues.is_empty() {
                println!("ok");
                return Ok(ExitCode::SUCCESS);
            }
            for i in &issues {
                println!("{i}");
            }
            Ok(ExitCode::FAILURE)
        }
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("{}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
