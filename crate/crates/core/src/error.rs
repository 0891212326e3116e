use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates one of the camera invariants.
    #[error("invalid configuration `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    /// A lens prescription with zero optical power.
    #[error("lens prescription has zero optical power (non-focusing element)")]
    NonFocusing,

    #[error("focus setting cannot be reached: {0}")]
    Unfocusable(String),

    #[error("{what} index {index} out of range [{min}, {max}]")]
    IndexOutOfRange {
        what: &'static str,
        index: i64,
        min: i64,
        max: i64,
    },

    #[error("rays are parallel; intersection lies at infinity")]
    ParallelRays,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matching window at ({x}, {y}) with shift {d} leaves the image")]
    WindowOutOfBounds { x: usize, y: usize, d: i32 },

    #[error("invalid matching parameters: {0}")]
    InvalidParams(String),

    /// An argument outside the domain of an operation.
    #[error("{0}")]
    Domain(String),

    #[error("scene error: {0}")]
    Scene(String),

    #[error("malformed graymap {path}: {message}")]
    Pgm { path: PathBuf, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn out_of_range(what: &'static str, index: i64, min: i64, max: i64) -> Self {
        Error::IndexOutOfRange {
            what,
            index,
            min,
            max,
        }
    }
}
