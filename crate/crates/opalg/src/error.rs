//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("operator is not hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("not a unitary matrix (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state family is empty")]
    EmptyFamily,

    #[error("algebra closure not reached after {rounds} rounds")]
    ClosureNotReached { rounds: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("intertwiner space has dimension {found}, expected 1")]
    IntertwinerDimension { found: usize },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },

    #[error("syntax error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown symbol `{name}` at position {position}")]
    UnknownSymbol { position: usize, name: String },

    #[error("index out of range at position {position}: `{symbol}` exceeds coordinate count {coords}")]
    IndexOutOfRange {
        position: usize,
        symbol: String,
        coords: usize,
    },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
