use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Distribution or model hyperparameter outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: column {column} is constant")]
    ConstantColumn { column: usize },

    #[error("LARS path failed at step {step}: {reason}")]
    Path { step: usize, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported model format version {found:?} (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("{path}:{line}:{column}: not a number: {value:?}")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("row count mismatch: {x_path} has {x_rows} rows, {y_path} has {y_rows}")]
    RowMismatch {
        x_path: PathBuf,
        x_rows: usize,
        y_path: PathBuf,
        y_rows: usize,
    },

    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from user-supplied data rather than numerics or IO.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::ConstantColumn { .. }
                | Error::NonNumeric { .. }
                | Error::RowMismatch { .. }
                | Error::Data { .. }
                | Error::Dimension(_)
                | Error::Corrupt { .. }
                | Error::Version { .. }
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Path { .. })
    }
}
