use thiserror::Error;

/// Errors raised by the numeric layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the range the series evaluators support.
    #[error("argument out of supported range: {0}")]
    OutOfRange(String),

    /// A caller-side precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The Fock cutoff is too small for the phase-space radius involved.
    #[error("cutoff violation: {0}")]
    Cutoff(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// The operator has an eigenvalue below the positivity tolerance.
    #[error("not a state: smallest eigenvalue {0:e}")]
    NotAState(f64),

    /// Quadrature refinement levels disagree by more than the accepted error.
    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    /// Two routes to the same quantity disagree beyond roundoff, usually a
    /// sign that a series was truncated too early.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
