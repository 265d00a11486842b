//! Error types shared across the crate.

use thiserror::Error;

/// Where in a model-file expression something happened (1-based line/column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Evaluation failures that must not silently propagate as NaN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivideByZero,
    /// ln of a non-positive value, sqrt of a negative value, or a power
    /// with negative base and non-integer exponent.
    DomainError,
}

impl std::fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalErrorKind::DivideByZero => write!(f, "division by zero"),
            EvalErrorKind::DomainError => write!(f, "domain error"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("singular matrix (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("evaluation error at {span}: {kind}")]
    Eval { kind: EvalErrorKind, span: Span },

    #[error("consistent initialization failed at t={t}: residual {residual:.3e} after {iterations} iterations")]
    ConsistencyFailure {
        t: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("time {t} outside trajectory span [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown example id: {0}")]
    UnknownExample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
