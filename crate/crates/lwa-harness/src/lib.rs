//! Experiment harness for the subset-weighted MCMC library: dataset
//! generation, configured runs, replication sweeps, analysis reports and
//! the enumeration-based oracle suite, behind the `lwa` CLI.

pub mod commands;
pub mod config;
pub mod io;

use thiserror::Error;

/// Errors mapped to CLI exit codes: configuration problems exit 2,
/// failed oracle/acceptance checks exit 3, everything else exits 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<lwa_mcmc::Error> for CliError {
    fn from(e: lwa_mcmc::Error) -> Self {
        match e {
            lwa_mcmc::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Other(anyhow::Error::new(other)),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(anyhow::Error::new(e))
    }
}
