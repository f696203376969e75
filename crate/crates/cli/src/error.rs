use std::fmt;

/// Failure classes, one per exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// A verification check failed.
    Verification(String),
    /// Bad user input, rejected before (or by) a precondition check.
    Validation(String),
    /// An internal cross-check disagreed, or a computation did not converge.
    Consistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Consistency(_) => 3,
        }
    }

    /// The more severe of two failures (higher exit code wins).
    pub fn worst(self, other: CliError) -> CliError {
        if other.exit_code() > self.exit_code() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Consistency(m) => write!(f, "consistency error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cvpqc::Error> for CliError {
    fn from(e: cvpqc::Error) -> Self {
        use cvpqc::Error as E;
        match e {
            E::OutOfRange(_) | E::Precondition(_) | E::Cutoff(_) => CliError::Validation(e.to_string()),
            E::DimensionMismatch { .. } | E::NotAState(_) | E::Convergence(_) | E::Consistency(_) => {
                CliError::Consistency(e.to_string())
            }
        }
    }
}
