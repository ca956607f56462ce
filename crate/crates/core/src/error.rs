use thiserror::Error;

/// Errors surfaced by the linear algebra kernels and the experiment layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error(
        "{algorithm} did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NotConverged {
        algorithm: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("matrix is singular or near-singular (pivot ratio {pivot_ratio:.3e})")]
    NearSingular { pivot_ratio: f64 },
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient nondegenerate points: need {needed}, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
