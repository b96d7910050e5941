use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time argument must be non-negative, got {0} fs")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("t = {t} fs outside supported range [0, {t_max} fs] of the tabulated bath")]
    OutOfRange { t: f64, t_max: f64 },

    #[error("bad correlation-function table: {0}")]
    BadTable(String),

    #[error("level index {index} out of range for a {num_levels}-level system")]
    InvalidLevel { index: usize, num_levels: usize },

    #[error("pathway (i={i}, j={j}) unsupported for this operation: {reason}")]
    UnsupportedPathway { i: usize, j: usize, reason: String },

    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("integrator step must be positive and finite, got {0} fs")]
    BadStep(f64),

    #[error("frequency axes do not match: {0}")]
    AxisMismatch(String),

    #[error("spectrum peak lies on the grid boundary; enlarge the grid or apply a window")]
    PeakOnBoundary,

    #[error("spectrum has multiple global maxima within 1e-9 relative; peak metrics are ambiguous")]
    AmbiguousPeak,

    #[error("config error: {0}")]
    Config(String),

    #[error("failed to {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(action: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            action,
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
