use std::path::{Path, PathBuf};

use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for runtime failures that are neither validation nor solver
/// problems (IO, malformed inputs).
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when a solver stopped early; artifacts are still written.
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// A config field is missing, malformed or out of range.
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Core(#[from] mlcs_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn malformed(path: &Path, message: impl Into<String>) -> Self {
        CliError::Malformed { path: path.to_path_buf(), message: message.into() }
    }

    /// Parameter errors raised by the core count as validation errors.
    pub fn exit_code(&self) -> i32 {
        use mlcs_core::Error as E;
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Core(E::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            CliError::Core(
                E::NotPowerOfTwo(_)
                | E::DimensionMismatch { .. }
                | E::InvalidParameter(_)
                | E::DepthTooLarge { .. }
                | E::TooLarge(_),
            ) => EXIT_VALIDATION,
            _ => EXIT_FAILURE,
        }
    }
}
