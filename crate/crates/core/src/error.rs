use thiserror::Error;

/// Errors raised by the numerical routines and the command layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension d={dim}: {hint}")]
    UnsupportedDimension { dim: usize, hint: &'static str },

    #[error("invalid harmonic index j={j} for degree k={k} in dimension d={dim}")]
    InvalidIndex { k: usize, j: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent spectral measure: {0}")]
    InconsistentMeasure(String),

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("singular affine fit: {0}")]
    SingularFit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("test function is not even on S^(d-1) x R: {0}")]
    NotEven(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(std::io::Error::other(e.to_string()))
    }
}
