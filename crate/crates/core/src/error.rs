use thiserror::Error;

/// Errors raised by the state, operator and protocol routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}")]
    InvalidDimension(usize),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (max |m - m†| = {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("measurement direction not normalized (t² + |y|² = {0})")]
    Unnormalized(f64),

    #[error("outcome {outcome} has probability {probability:e}; post-measurement state undefined")]
    DegenerateOutcome { outcome: usize, probability: f64 },

    #[error("witness does not detect the state (Tr[Wρ] = {0})")]
    NotDetected(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
