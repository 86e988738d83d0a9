use alloc::string::String;

/// Contract violations and construction failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("expert index {index} out of range for {experts} experts")]
    IndexOutOfRange { index: usize, experts: usize },

    #[error("pair statistics need two distinct experts, got ({0}, {0})")]
    SelfPair(usize),

    #[error("invalid prediction: {0}")]
    InvalidPrediction(&'static str),

    #[error("closed-form moments are not available for this instance")]
    MissingMoments,

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("experts {0} and {1} have equal risk; the elimination window is undefined")]
    EqualRisks(usize, usize),

    #[error("need at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("no round has been observed yet")]
    NoRounds,

    #[error("internal invariant violated: {0}")]
    Internal(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
