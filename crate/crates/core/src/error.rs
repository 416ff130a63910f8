use thiserror::Error;

/// Errors raised by the model, verifier, search and file-format layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix must have at least one weighing and one mint")]
    EmptyMatrix,

    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fault pattern index {index} out of range for {mints} mints")]
    PatternOutOfRange { index: u64, mints: usize },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("ratio criterion needs at least two weighings, got {0}")]
    NoRatios(usize),

    #[error("{mints} mints exceeds the configured cap of {cap}")]
    MintCap { mints: usize, cap: usize },

    #[error("brute-force space of {size} matrices exceeds the cap of {cap}")]
    OracleCap { size: u128, cap: u128 },

    #[error("invalid search argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
