use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped so that front ends can map them onto exit codes:
/// caller-side problems (bad input, violated preconditions, exhausted
/// budgets) versus genuine internal failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime in [2, 2^31]")]
    NotPrime(u64),
    #[error("field mismatch: p={left} vs p={right}")]
    FieldMismatch { left: u64, right: u64 },
    #[error("variable count mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("empty domain")]
    EmptyDomain,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {needed} evaluations needed, budget is {budget}; {hint}")]
    Budget {
        needed: f64,
        budget: u64,
        hint: String,
    },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("no decomposition available: {0}")]
    NoDecomposition(String),
    #[error("internal check failed: {0}")]
    Internal(String),
    /// A link of a pipeline's inequality chain did not hold.
    #[error("stage {stage} failed: {message}")]
    StageFailed { stage: String, message: String },
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn stage(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::StageFailed {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by the library.
    pub fn is_caller_error(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::StageFailed { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
