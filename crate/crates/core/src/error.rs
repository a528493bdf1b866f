use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unexpected CSV header: {0}")]
    Header(String),

    #[error("line {line}: {message}")]
    RowRange { line: u64, message: String },

    #[error("invalid value: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dataset is not labeled")]
    Unlabeled,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value encountered during {0}")]
    Numeric(String),

    #[error("unsupported model format version {found} (this build reads {supported})")]
    Version { found: u64, supported: u64 },

    #[error("corrupted model file: {0}")]
    Corrupt(String),

    #[error("{model}: {message}")]
    Unsupported { model: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse category used for CLI exit codes and error prefixes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Numeric(_) => ErrorCategory::Numeric,
            Error::Config(_) | Error::Unsupported { .. } => ErrorCategory::Usage,
            _ => ErrorCategory::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Usage => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numeric => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorCategory::Usage => "usage",
            ErrorCategory::Data => "data",
            ErrorCategory::Numeric => "numeric",
        }
    }
}
