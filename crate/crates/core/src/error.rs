use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or metadata dimensions do not fit together.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("malformed correlation document: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The correlation failed validation (negativity beyond the clamp band,
    /// broken normalization).
    #[error("invalid correlation: {0}")]
    InvalidCorrelation(String),

    #[error("oracles only support the minimal 2-1-2 / 2-2-2 scenario, got {0}")]
    UnsupportedShape(String),

    #[error("LP solver failed: {0}")]
    Numeric(String),

    /// A bisection or range search found no verdict change in its interval.
    #[error("no verdict flip: {0}")]
    NoBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
