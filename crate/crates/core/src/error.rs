use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed operator: {0}")]
    MalformedOperator(String),

    #[error("unsupported built-in operator `{name}` in dimension {dim}")]
    UnsupportedBuiltin { name: String, dim: usize },

    /// The linear system `sum_a k_a b_a = Id` has no solution.
    #[error("no left inverse for the stacked coefficients: residual {residual:.3e} (operator is not cocanceling)")]
    NoIdentity { residual: f64 },

    #[error("symbol is not injective at xi = {xi:?} (smallest singular value {sigma_min:.3e})")]
    EllipticityViolation { xi: Vec<f64>, sigma_min: f64 },

    #[error("field provides derivatives up to order {available}, order {requested} requested")]
    MissingDerivative { requested: usize, available: usize },

    #[error("point {point:?} lies outside the grid box of half-width {half_width}")]
    OutsideGrid { point: Vec<f64>, half_width: f64 },

    #[error("power {exponent} is not locally integrable in dimension {dim}")]
    NotIntegrable { exponent: f64, dim: usize },

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("probe refused: {0}")]
    ProbeRefused(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
