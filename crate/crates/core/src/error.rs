use std::path::PathBuf;

/// Coarse classification of failures, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The caller asked for something that cannot be satisfied by any input.
    Usage,
    /// Input files or tokens are missing, malformed or inconsistent.
    Data,
    /// A numerical routine failed (non-convergence, divergence).
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate token `{0}`")]
    DuplicateToken(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("row {0} is a zero vector")]
    ZeroRow(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("token `{0}` is not in the vocabulary")]
    UnknownToken(String),

    #[error("empty {0}")]
    Empty(String),

    #[error("matrix is not symmetric (|a[{row}][{col}] - a[{col}][{row}]| too large)")]
    NotSymmetric { row: usize, col: usize },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("could not draw a non-degenerate basis after {0} attempts")]
    DegenerateDraw(usize),

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_) => ErrorCategory::Usage,
            Error::NoConvergence { .. } | Error::Divergence(_) | Error::DegenerateDraw(_) => {
                ErrorCategory::Numeric
            }
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
