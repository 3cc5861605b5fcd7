use thiserror::Error;

/// Errors raised by the library. Numerical solvers that merely fail to
/// converge report that through their `SolveReport` status instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate direction: the zero element has no Morse-Bott decomposition")]
    DegenerateDirection,

    #[error("target lies outside the convex hull (distance {distance:.3e})")]
    Infeasible { distance: f64 },

    #[error("target {target} is not bracketed by [{low}, {high}]")]
    BracketFailure { target: f64, low: f64, high: f64 },

    #[error("degenerate sampling: the sampled image has affine dimension 0")]
    DegenerateSampling,

    #[error("hull dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
