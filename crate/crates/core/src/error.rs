use thiserror::Error;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("blow-up at step {step} (t = {t}): {reason}")]
    BlowUp { step: u64, t: f64, reason: String },
    #[error("integrability hypothesis violated: {0}")]
    Divergent(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CascadeError>;
