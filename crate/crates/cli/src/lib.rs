//! IO layer over `bailab-core`: JSON/CSV emission, config files, and a
//! deterministic parallel replication runner. The `bailab` binary is a
//! thin dispatcher over [`commands`].

pub mod commands;
pub mod config;
pub mod csvout;
pub mod jsonfmt;
pub mod runner;

use std::fmt;

/// Errors with the binary's exit-code contract attached: configuration
/// problems exit 2, runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Map a core error: domain/validation problems are configuration
    /// mistakes; resource caps are runtime conditions.
    pub fn from_core(err: bailab_core::Error) -> Self {
        use bailab_core::Error::*;
        match err {
            StateSpaceTooLarge { .. } | PathSpaceTooLarge { .. } | TooFewPoints { .. } => {
                CliError::Runtime(err.to_string())
            }
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}
