//! Experiment harness for `entcont`: configuration, JSON state files, CSV
//! output, run manifests and the verification suite.

pub mod config;
pub mod experiments;
pub mod output;
pub mod stateio;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] entcont::Error),
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVARIANT_FAILURE: i32 = 2;
    pub const WITNESS_NOT_FOUND: i32 = 3;
    pub const BAD_CONFIG: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::BAD_CONFIG,
            _ => 1,
        }
    }
}
