use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("{scenario}: {source}")]
    Simulation {
        scenario: &'static str,
        #[source]
        source: swbound_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("row has {found} columns, header has {expected}")]
    RaggedRow { expected: usize, found: usize },
}
