use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix data has {len} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is numerically rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("sqrt(p) - sqrt(k) - alpha = {denominator} must be positive")]
    InvalidAlpha { denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("intermediate value overflowed the floating-point range")]
    Overflow,

    #[error("Krylov start block has no nonzero columns")]
    EmptyBasis,

    #[error("no spectral gap: sigma_k = {sigma_k} <= sigma_(p+1) = {sigma_p1}")]
    NoGap { sigma_k: f64, sigma_p1: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
