//! Configuration-driven experiment runner around the `acflow` solver: single
//! simulations and convergence studies with CSV tables and static SVG plots.

pub mod config;
pub mod report;
pub mod runner;

use thiserror::Error;

/// Failure classes, mapped to process exit codes by the binary: configuration
/// problems exit with 2, numerical failures with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}
