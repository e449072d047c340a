use thiserror::Error;

/// Errors raised by tensor, channel and supermap operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown leg `{0}`")]
    UnknownLabel(String),

    #[error("duplicate leg `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch on `{label}`: {left} vs {right}")]
    DimMismatch {
        label: String,
        left: usize,
        right: usize,
    },

    #[error("polarity clash on `{0}`: contracted legs must be one in-leg and one out-leg")]
    PolarityClash(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("signaling relation does not partition the channel: {0}")]
    PartitionMismatch(String),

    #[error("control states are not perfectly distinguishable (max deviation {0:e})")]
    NotDistinguishable(f64),

    #[error("channel set `{0}` must be normal and convex for extraction")]
    NotNormalConvex(String),

    #[error("process is not deterministic (trace deviation {0:e})")]
    NonDeterministic(f64),

    #[error("total dimension {total} exceeds configured maximum {max}")]
    TooLarge { total: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
