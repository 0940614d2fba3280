//! CLI error taxonomy with stable exit codes: 2 schema, 3 numerical,
//! 4 IO.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn numerical(err: impl std::fmt::Display) -> Self {
        CliError::Numerical(err.to_string())
    }

    pub fn io(err: impl std::fmt::Display) -> Self {
        CliError::Io(err.to_string())
    }
}
