//! Experiment runner for killed Ornstein–Uhlenbeck waiting times.
//!
//! [`config`] resolves an [`config::ExperimentConfig`] from defaults, a JSON
//! file and command-line flags; [`commands`] runs the single-purpose
//! experiments and [`recipes`] the reproduction recipes. Every artifact is
//! written through [`output::RunOutput`], which embeds the tool version and
//! the configuration hash.

pub mod commands;
pub mod config;
pub mod output;
pub mod recipes;

use serde_json::json;
use thiserror::Error;

/// Failure of a run. Configuration problems exit with status 2, runtime
/// failures with status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Runtime {
        stage: String,
        #[source]
        source: kol_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime { .. } => 1,
        }
    }

    /// Machine-readable description printed on standard error.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Config(m) => json!({"status": "error", "error": "config", "message": m}),
            CliError::Runtime { stage, source } => {
                json!({"status": "error", "error": "runtime", "stage": stage, "message": source.to_string()})
            }
        }
    }
}

/// Wraps a core error with the stage it came from.
pub fn at_stage(stage: impl Into<String>) -> impl FnOnce(kol_core::Error) -> CliError {
    let stage = stage.into();
    move |source| CliError::Runtime { stage, source }
}
