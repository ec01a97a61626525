use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed row or field in an input file, with a 1-based line number.
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    /// Input file contained no data rows.
    #[error("{0}: empty input")]
    EmptyInput(PathBuf),
    /// A parameter violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Request exceeded the scope of a brute-force oracle.
    #[error("out of oracle scope: {0}")]
    Scope(String),
    /// A filtration referenced a face that is not present earlier in the order.
    #[error("inconsistent filtration: {0}")]
    InconsistentFiltration(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Process exit code for the CLI: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Scope(_) => 1,
            Error::Parse { .. } | Error::EmptyInput(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::InconsistentFiltration(_) => 3,
        }
    }
}
