use thiserror::Error;

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("{op}: shape mismatch {lhs} vs {rhs}")]
    ShapeMismatch { op: &'static str, lhs: String, rhs: String },
    #[error("{op}: invalid argument: {msg}")]
    InvalidArg { op: &'static str, msg: String },
    #[error("{op}: produced a non-finite value")]
    NonFinite { op: &'static str },
    #[error("backward: loss must be a scalar, got shape {0}")]
    LossNotScalar(String),
    #[error("backward: loss does not depend on any gradient-tracked leaf")]
    LossDetached,
}

pub type Result<V> = std::result::Result<V, TapeError>;
