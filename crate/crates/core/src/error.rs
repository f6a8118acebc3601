use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero-length segment")]
    ZeroLengthSegment,

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e} after {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("rejection acceptance rate {rate:e} below budget {min:e}")]
    AcceptanceTooLow { rate: f64, min: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
