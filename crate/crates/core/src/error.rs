use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis parameters: {0}")]
    InvalidBasis(String),

    #[error("non-finite coefficient {value} at mode k = {mode}")]
    NonFiniteCoefficient { mode: usize, value: f64 },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("KLMN relative bound must satisfy 0 < a < 1, got {0}")]
    InvalidRelativeBound(f64),

    #[error("eigensolver residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigensolverFailure { residual: f64, tolerance: f64 },

    #[error("density normalization: integral is {found}, expected {expected}")]
    Normalization { found: f64, expected: f64 },

    #[error(
        "density is not strictly positive (minimum grid value {minimum:e}); \
         only strictly positive densities are v-representable"
    )]
    NotStrictlyPositive { minimum: f64 },

    #[error("density has Fourier content beyond the basis: |rho_k| = {magnitude:e} at k = {mode}")]
    BeyondBasis { mode: usize, magnitude: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("step too large: perturbed density has minimum {minimum:e}")]
    StepTooLarge { minimum: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            message: message.to_string(),
        }
    }
}
