use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("operator is not Hermitian (max |H - H^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension {0} exceeds the dense limit {1}")]
    TooLarge(usize, usize),

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("circuit contains a multi-controlled RZ; lower it before export")]
    UndecomposedGate,

    #[error("qasm parse error on line {line}: {message}")]
    Qasm { line: usize, message: String },

    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
