//! Scenario runner for the `swbound-core` numerics.
//!
//! A scenario file is a flat list of `key = value` lines naming one of the
//! built-in experiments and its parameters. Running it produces CSV tables
//! with 17 significant digits and LF line endings. Sweeps repeat a scenario
//! over one parameter and summarize each run by a single scalar.

pub mod config;
pub mod csv_trace;
mod error;
pub mod scenarios;
pub mod selftest;
pub mod sweep;

pub use config::{validate_config, Issue, Scenario, ScenarioConfig, OUTPUT_DIR_ENV};
pub use csv_trace::CsvTrace;
pub use error::CliError;
pub use scenarios::{execute, run_scenario, RunSummary, ScenarioOutput};
pub use sweep::{sweep, SweepReport};
