//! One module per subcommand plus the shared simulation driver.

pub mod ode;
pub mod oracle;
pub mod simulate;
pub mod sweep;
pub mod theorem1;
pub mod theorem2;

use std::fmt;

use crate::manifest::RunStatus;

/// Result of a command that produced a run directory.
#[derive(Debug)]
pub struct Outcome {
    pub status: RunStatus,
    pub report: String,
}

impl Outcome {
    pub fn new(status: RunStatus, report: String) -> Self {
        Self { status, report }
    }
}

/// Failures that leave no usable run behind.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Other(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<egl_core::EglError> for CliError {
    fn from(e: egl_core::EglError) -> Self {
        CliError::Other(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

pub type CmdResult = Result<Outcome, CliError>;
