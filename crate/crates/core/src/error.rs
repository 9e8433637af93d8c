use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not in su(2): deviation {deviation:e} exceeds tolerance {tol:e}")]
    NotInSu2 { deviation: f64, tol: f64 },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: String, found: u8 },

    #[error("cup product of degrees {left} and {right} exceeds the top degree 2")]
    DegreeOverflow { left: u8, right: u8 },

    #[error("grid mismatch: expected {expected}, found {found}")]
    GridMismatch { expected: String, found: String },

    #[error("parse error at line {line}, column {column} ({field}): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line: 0,
            column: 0,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn from_json(field: impl Into<String>, err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            field: field.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
