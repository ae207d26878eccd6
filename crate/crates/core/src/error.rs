use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("term-count guard exceeded: {terms} terms > cap {cap}")]
    TermCapExceeded { terms: usize, cap: usize },

    #[error("polynomial text format, line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: String },

    #[error("Jacobi eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("modified Chebyshev breakdown: non-positive beta at step {step}")]
    BreakdownNonPositiveBeta { step: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("anchor lies outside the closure of the region: every volume estimate is zero")]
    AnchorOutsideClosure,

    #[error("ratio denominator is zero: f^(r) equals f_min to tolerance")]
    DenominatorZero,

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("brute-force budget exceeded: n = {n} > {max}")]
    BudgetExceeded { n: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
