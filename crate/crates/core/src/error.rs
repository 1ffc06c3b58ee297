use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid measure component `{component}`: {reason}")]
    InvalidMeasure { component: String, reason: String },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("non-finite field value at quadrature node {node} = {point:?}")]
    NonFiniteValue { node: usize, point: Vec<f64> },

    #[error("rank-deficient tangent at node {node} of component `{component}`")]
    DegeneratePatch { node: usize, component: String },

    #[error("unsupported field (a compactly supported Lipschitz field is required): {0}")]
    UnsupportedField(String),

    #[error("ensemble refused: {0}")]
    EnsembleRefused(String),

    #[error("certificate inconsistency: {0}")]
    CertificateInconsistent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
