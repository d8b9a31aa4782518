use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: a={a} > b={b}")]
    InvalidInterval { a: i64, b: i64 },
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("support overflow: operation would produce {atoms} atoms (cap {cap})")]
    SupportOverflow { atoms: u64, cap: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sampling range: {0}")]
    SamplingRange(String),
    #[error("infeasible window at level {k}: {detail}")]
    InfeasibleWindow { k: u32, detail: String },
    #[error("counting-event hypothesis violated at (m={m}, n={n}, state={state})")]
    HypothesisViolation { m: usize, n: usize, state: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
