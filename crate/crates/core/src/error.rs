use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library and the command-line tool can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot read {path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    NonNumeric { row: usize, col: usize, value: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("column {column} is constant")]
    ConstantColumn { column: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("numerical breakdown at column {index}: {message}")]
    Numerical { index: usize, message: String },

    #[error("replication {rep}, method {method}: {source}")]
    Replication {
        rep: u64,
        method: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error: 2 usage, 3 I/O, 4 data validation,
    /// 5 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config { .. } => 2,
            Error::Io { .. } => 3,
            Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::Shape(_)
            | Error::ConstantColumn { .. }
            | Error::Degenerate(_) => 4,
            Error::NotPositiveDefinite { .. } | Error::Numerical { .. } => 5,
            Error::Replication { source, .. } => source.exit_code(),
        }
    }
}
