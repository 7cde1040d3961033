//! Error type shared by all analysis modules.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by system validation and the analysis routines.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type the
/// computation ran at.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A realization matrix has the wrong shape at some time index.
    DimensionMismatch {
        matrix: &'static str,
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A matrix sequence has the wrong number of entries.
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix entry is NaN or infinite.
    NonFinite { matrix: &'static str, index: usize },
    /// Time indices violate the required ordering.
    IndexOrder { lo: usize, hi: usize },
    /// A time index exceeds the horizon.
    IndexOutOfRange { index: usize, max: usize },
    /// The spectral parameter q lies outside the feasible range.
    QOutOfRange { q: f64, sup: f64 },
    /// A matrix required to be positive definite is not.
    NotPositiveDefinite {
        what: &'static str,
        index: Option<usize>,
    },
    /// A scalar argument violates its precondition.
    InvalidArgument { arg: &'static str, reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                matrix,
                index,
                expected,
                found,
            } => write!(
                f,
                "matrix {matrix}[{index}] has shape {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Error::LengthMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what} has {found} entries, expected {expected}"),
            Error::NonFinite { matrix, index } => {
                write!(f, "matrix {matrix}[{index}] contains a non-finite entry")
            }
            Error::IndexOrder { lo, hi } => {
                write!(f, "time indices out of order: required {lo} <= {hi}")
            }
            Error::IndexOutOfRange { index, max } => {
                write!(f, "time index {index} exceeds maximum {max}")
            }
            Error::QOutOfRange { q, sup } => {
                write!(f, "q = {q} outside feasible range [0, {sup})")
            }
            Error::NotPositiveDefinite { what, index } => match index {
                Some(k) => write!(f, "{what} is not positive definite at step {k}"),
                None => write!(f, "{what} is not positive definite"),
            },
            Error::InvalidArgument { arg, reason } => {
                write!(f, "invalid argument {arg}: {reason}")
            }
        }
    }
}

impl std::error::Error for Error {}
