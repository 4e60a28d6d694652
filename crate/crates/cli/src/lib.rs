//! Offline driver for the arena: workbook features, rating fits and
//! reports, vote simulation, and the HTTP service.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

use sheetarena_rating::FitError;

/// Failures that map to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self::Input(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::DegenerateData(_) | FitError::SingularInformation(_) | FitError::Numerical(_) => {
                Self::Numerical(e.to_string())
            }
            _ => Self::Input(e.to_string()),
        }
    }
}

/// Exit code for an error returned by a command: the first [`CliError`]
/// in the chain decides, anything else is 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<CliError>())
        .map_or(1, CliError::exit_code)
}
