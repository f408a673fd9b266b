use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{a} is not invertible modulo {m}")]
    NotInvertible { a: i64, m: u64 },
    #[error("{r} is not an exact divisor of {q}")]
    NotExactDivisor { r: u64, q: u64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("truncation: need at least {required} coefficients, have {available}")]
    Truncation { required: usize, available: usize },
    #[error("precision target {target:e} unreachable (estimate {achieved:e}); {hint}")]
    Precision { target: f64, achieved: f64, hint: String },
    #[error("missing contragredient series for {0}")]
    MissingContragredient(String),
    #[error("data mismatch: {0}")]
    DataMismatch(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
