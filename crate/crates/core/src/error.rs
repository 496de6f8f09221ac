use std::path::PathBuf;

use thiserror::Error;

use crate::material::AssumptionReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor assumptions violated: {0}")]
    AssumptionViolated(Box<AssumptionReport>),

    #[error("unsupported norm exponent {0}; expected one of 4/3, 2, 8/3, inf")]
    UnsupportedExponent(f64),

    #[error("point {value} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("mollifier needs {needed} frames of history but only {available} are buffered")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("step rejected at t = {t}: L-infinity increment {increment} exceeds guard {guard}")]
    StepRejected { t: f64, increment: f64, guard: f64 },

    #[error("fields live on different grids")]
    MismatchedGrids,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("snapshot checksum mismatch")]
    ChecksumMismatch,

    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::StepRejected { .. }
                | Error::InsufficientHistory { .. }
        )
    }
}
