//! Crate-wide error type.

use std::fmt;

/// Errors raised by model construction, solvers, and file I/O.
#[derive(Debug)]
pub enum Error {
    /// Two operands disagree on a dimension.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A vector entry violates a nonnegativity requirement.
    NegativeEntry { index: usize, value: f64 },
    /// A vector entry is NaN or infinite where a finite value is required.
    NonFinite { index: usize, value: f64 },
    /// Empty vector where at least one entry is required.
    Empty(&'static str),
    /// `(Af)_i = 0` against a positive observed count; no gradient exists there.
    ZeroIntensityAtPositiveCount { index: usize },
    /// A sensing-matrix column has no nonzero entry.
    ZeroColumn { col: usize },
    /// Signal length must be a power of two for this transform or partition.
    NotPowerOfTwo { len: usize },
    /// A scalar parameter is out of its documented range.
    InvalidParameter { name: &'static str, message: String },
    /// Underlying file I/O failure.
    Io(std::io::Error),
    /// A text file failed to parse; `line` is 1-based.
    Parse { line: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "dimension mismatch for {what}: expected {expected}, got {got}"),
            Error::NegativeEntry { index, value } => {
                write!(f, "negative entry {value} at index {index} where nonnegative values are required")
            }
            Error::NonFinite { index, value } => {
                write!(f, "non-finite entry {value} at index {index}")
            }
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::ZeroIntensityAtPositiveCount { index } => {
                write!(f, "projected intensity is zero at index {index} but the observed count is positive")
            }
            Error::ZeroColumn { col } => {
                write!(f, "sensing matrix column {col} has no nonzero entries")
            }
            Error::NotPowerOfTwo { len } => {
                write!(f, "length {len} is not a power of two")
            }
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter {name}: {message}")
            }
            Error::Io(e) => write!(f, "I/O error: {e}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        message: message.into(),
    }
}
