use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline stages.
///
/// Variants fall into three families that map onto the CLI exit codes:
/// usage problems (1), bad or unreadable input data (2), and broken
/// internal invariants (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}", data_message(.path, .row, .message))]
    Data {
        path: Option<PathBuf>,
        row: Option<u64>,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn data_message(path: &Option<PathBuf>, row: &Option<u64>, message: &str) -> String {
    match (path, row) {
        (Some(p), Some(r)) => format!("{}: row {}: {}", p.display(), r, message),
        (Some(p), None) => format!("{}: {}", p.display(), message),
        (None, Some(r)) => format!("row {}: {}", r, message),
        (None, None) => message.to_string(),
    }
}

impl Error {
    pub fn data(message: impl Into<String>) -> Self {
        Error::Data {
            path: None,
            row: None,
            message: message.into(),
        }
    }

    pub fn data_at(path: impl Into<PathBuf>, row: Option<u64>, message: impl Into<String>) -> Self {
        Error::Data {
            path: Some(path.into()),
            row,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file path to a data error that does not carry one yet.
    pub fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Data {
                path: None,
                row,
                message,
            } => Error::Data {
                path: Some(path.into()),
                row,
                message,
            },
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidArgument(_) => 1,
            Error::Io { .. } | Error::Data { .. } | Error::Json(_) => 2,
            Error::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
