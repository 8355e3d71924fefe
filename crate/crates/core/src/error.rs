use alloc::string::String;
use core::fmt;

/// Errors shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A length that had to be a power of two was not.
    NotPowerOfTwo(usize),
    /// Operand lengths or shapes disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A parameter is outside its documented domain.
    InvalidParameter(String),
    /// A wavelet decomposition is too deep for the signal length.
    DepthTooLarge { len: usize, levels: usize, order: usize },
    /// Exhaustive enumeration was requested for a problem that is too large.
    TooLarge(String),
    /// A constructive routine gave up after exhausting its retries.
    ConstructionFailed(String),
    /// An iterative solver stopped without meeting its tolerance.
    NotConverged { iterations: usize, residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPowerOfTwo(n) => write!(f, "length {n} is not a power of two"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::DepthTooLarge { len, levels, order } => write!(
                f,
                "{levels} decomposition levels are too many for length {len} with db{order}"
            ),
            Error::TooLarge(m) => write!(f, "problem too large: {m}"),
            Error::ConstructionFailed(m) => write!(f, "construction failed: {m}"),
            Error::NotConverged { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_pow2(n: usize) -> Result<()> {
    if n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
