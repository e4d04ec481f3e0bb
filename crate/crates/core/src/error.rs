use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {restarts} restarts (worst residual {worst_residual:e})")]
    NoConvergence {
        restarts: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("coupled codimension-one intersection; use the metric-graph reference")]
    CodimensionOne,

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
