//! Experiment harness: configuration-driven runs of the verification and
//! realization workflows, with deterministic seeds and CSV reports.

pub mod config;
pub mod experiments;
pub mod report;
pub mod rng;
pub mod targets;

use config::ConfigError;

/// Errors surfaced by the harness, mapped to exit codes by the binary.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input (exit 2).
    Config(ConfigError),
    /// Propagated library error (exit 3).
    Lib(franks::error::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "ConfigError: {e}"),
            CliError::Lib(e) => write!(f, "{}: {e}", e.name()),
        }
    }
}

impl std::error::Error for CliError {}
