use thiserror::Error;

/// Crate-wide error type. Arithmetic never wraps silently: every overflow of
/// the checked 128-bit width surfaces as `Overflow` with the operation name.
#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("group spec parse error at line {line}: {msg}")]
    SpecParse { line: usize, msg: String },

    #[error("ball not saturated: {0}")]
    Unsaturated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
