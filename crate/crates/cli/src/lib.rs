//! Command-line front end for `thermobound`.
//!
//! A run is described by one JSON document ([`config::RunConfig`]);
//! [`run::run`] executes it and writes tables and plots.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use config::FieldError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<FieldError>),

    /// A table handed to `plot` is unusable.
    #[error("invalid input table: {0}")]
    Input(String),

    #[error(transparent)]
    Numeric(#[from] thermobound::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'static str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    fields: &'a [FieldError],
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Numeric(thermobound::Error::Config(_)) => "config",
            CliError::Input(_) => "input",
            CliError::Numeric(_) => "numeric",
            CliError::Io { .. } => "io",
            CliError::Csv(e) if e.is_io_error() => "io",
            CliError::Csv(_) => "input",
        }
    }

    /// 2 configuration/input, 3 numeric or solver failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "numeric" => 3,
            "io" => 4,
            _ => 2,
        }
    }

    /// Single-line machine-readable description for stderr.
    pub fn to_json(&self) -> String {
        let fields = match self {
            CliError::Config(f) => &f[..],
            _ => &[],
        };
        serde_json::to_string(&ErrorReport {
            error: self.category(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            fields,
        })
        .expect("error report serializes")
    }
}
