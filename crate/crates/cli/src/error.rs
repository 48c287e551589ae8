use std::process::ExitCode;

use cvi::CviError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input: spec file, flags, intervention syntax.
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(1),
            CliError::NotConverged(_) => ExitCode::from(2),
        }
    }
}

impl From<CviError> for CliError {
    fn from(e: CviError) -> Self {
        match e {
            CviError::ProjectionNotConverged { .. } | CviError::SolveNotConverged { .. } => {
                CliError::NotConverged(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
