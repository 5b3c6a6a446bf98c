//! Batch front end: configuration, dispatch and artifacts.

pub mod config;
mod run;

use std::path::PathBuf;

use serde_json::json;

pub use config::{Command, RunConfig};
pub use run::{load_config, run, Artifact, Manifest};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Machine-readable report: error class, kind, offending parameter and message.
    pub fn report(&self) -> serde_json::Value {
        let (class, kind, parameter) = match self {
            CliError::Config { field, .. } => ("ConfigError", "ConfigError", Some(field.clone())),
            CliError::Solver(e) => ("SolverError", e.kind(), solver_parameter(e)),
            CliError::Io { path, .. } => ("IOError", "IOError", Some(path.display().to_string())),
        };
        json!({
            "error": class,
            "kind": kind,
            "parameter": parameter,
            "message": self.to_string(),
        })
    }
}

fn solver_parameter(e: &Error) -> Option<String> {
    match e {
        Error::InvalidParameter { name, .. } => Some(name.clone()),
        Error::Continuation { source, .. } => solver_parameter(source),
        _ => None,
    }
}
