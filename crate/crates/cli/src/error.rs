use thiserror::Error;

/// Process exit status for success.
pub const EXIT_OK: i32 = 0;
/// A numerical or statistical check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad arguments, configuration or I/O.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Core(#[from] rumour_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rumour_core::Error as E;
        match self {
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
            CliError::Core(E::ToleranceUnachievable { .. } | E::NonConvergence { .. }) => EXIT_CHECK_FAILED,
            CliError::Core(E::AtGridPoint { source, .. }) => match **source {
                E::ToleranceUnachievable { .. } | E::NonConvergence { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            },
            _ => EXIT_USAGE,
        }
    }
}
