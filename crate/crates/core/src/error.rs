use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants fall into three families (see [`ErrorKind`]): invalid parameters,
/// violated mathematical preconditions, and I/O or format failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("unsupported operator order {name} = {value} (only 2, 4 or 6 are supported)")]
    UnsupportedOrder { name: &'static str, value: u32 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max |A_ij - A_ji| = {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("insufficient data: {usable} usable modes, at least {required} required")]
    InsufficientData { usable: usize, required: usize },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("resonance violation in mode {j}: divisor {divisor:e} with nonzero forcing at frequency {k}")]
    ResonanceViolation { j: usize, k: i64, divisor: f64 },

    #[error("forcing is not admissible in mode {j}: resonant component {residual:e} at frequency {k}")]
    NotAdmissible { j: usize, k: i64, residual: f64 },

    #[error("frequency {tau} lies outside the time-grid band (T = {points}); enlarge T")]
    Band { tau: String, points: usize },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("axis error: {0}")]
    Axis(String),

    #[error("archive checksum mismatch (stored {stored:016x}, computed {computed:016x})")]
    Checksum { stored: u64, computed: u64 },

    #[error("archive version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("archive is truncated: {0}")]
    Truncated(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Precondition,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter { .. }
            | Error::UnsupportedOrder { .. }
            | Error::LengthMismatch { .. }
            | Error::Range(_)
            | Error::SizeGuard(_) => ErrorKind::Parameter,
            Error::NotSymmetric { .. }
            | Error::NoConvergence { .. }
            | Error::InsufficientData { .. }
            | Error::ResonanceViolation { .. }
            | Error::NotAdmissible { .. }
            | Error::Band { .. }
            | Error::Certification(_)
            | Error::Axis(_) => ErrorKind::Precondition,
            Error::Checksum { .. }
            | Error::Version { .. }
            | Error::Truncated(_)
            | Error::Format(_)
            | Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
