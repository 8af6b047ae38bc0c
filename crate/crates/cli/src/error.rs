use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] symvar::Error),

    #[error("invalid input: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use symvar::Error as E;
        match self {
            CliError::Core(E::Budget(_) | E::NonConvergence { .. }) => EXIT_BUDGET,
            CliError::Core(E::Internal(_)) => EXIT_INTERNAL,
            CliError::Core(_) | CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_INTERNAL,
        }
    }
}
