use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Variable count outside the supported range.
    #[error("variable count {n} outside supported range 1..=16")]
    InvalidVariableCount { n: u32 },

    /// A bit sequence had the wrong length for the declared variable count.
    #[error("expected {expected} table entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A table entry was neither 0 nor 1.
    #[error("table entry at index {index} is {value}, expected 0 or 1")]
    InvalidBit { index: usize, value: u8 },

    /// A hexadecimal table encoding could not be parsed.
    #[error("invalid hex truth table {text:?}: {reason}")]
    InvalidHex { text: String, reason: &'static str },

    /// A mutation position (or rotation amount) lies outside the table.
    #[error("position {position} out of range for table length {len}")]
    PositionOutOfRange { position: usize, len: usize },

    /// Two tables that must share a variable count do not.
    #[error("variable counts differ: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    /// The spectrum does not correspond to any Boolean function: after the
    /// inverse transform and 2^-n normalization some value is not +/-1.
    #[error(
        "spectrum is not the transform of a Boolean function: \
         normalized value at index {index} is {numerator}/{denominator}"
    )]
    NotABooleanSpectrum {
        index: usize,
        numerator: i64,
        denominator: i64,
    },

    /// A study claimed position-independence but the per-position rows differ.
    #[error("transition rows are not position-independent for {operator}: {detail}")]
    CollapseViolation { operator: String, detail: String },

    /// A sampling plan is not usable for the requested study.
    #[error("invalid sampling plan: {reason}")]
    PlanInvalid { reason: String },

    /// A search configuration fails validation.
    #[error("invalid search configuration: {reason}")]
    ConfigInvalid { reason: String },

    /// A textual operator or descriptor form could not be parsed.
    #[error("cannot parse {what} from {text:?}")]
    ParseFailed { what: &'static str, text: String },
}

pub type Result<T> = std::result::Result<T, Error>;
