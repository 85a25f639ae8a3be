use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("degenerate transform (non-invertible matrix)")]
    DegenerateTransform,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("netpbm format: {0}")]
    Format(String),
}

pub type Result<V> = std::result::Result<V, ImageError>;
