use thiserror::Error;

pub type Result<T> = std::result::Result<T, RbxError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RbxError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis is not orthonormal: Gram entry ({row}, {col}) deviates by {deviation:e}")]
    NotOrthonormal {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("invalid extension: the base subspace is not contained in the extended one (deviation {deviation:e})")]
    InvalidExtension { deviation: f64 },

    #[error("novelty subspace is not orthogonal to the base subspace (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    #[error("novelty rank {rank} exceeds the admissible bound {bound}")]
    RankBoundExceeded { rank: usize, bound: usize },

    #[error("novelty subspace is not reducible along the residual span: dim(U)={dim_u}, dim(U∩W)={dim_in}, dim(U∩W⊥)={dim_out}")]
    NotReducible {
        dim_u: usize,
        dim_in: usize,
        dim_out: usize,
    },

    #[error("the dataset leaves no residual outside the current subspace")]
    NoResidual,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e}, eigenvalue estimate {eigenvalue})")]
    NotConverged {
        iterations: usize,
        eigenvalue: f64,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("direction lies outside the external residual span (distance {distance:e})")]
    InvalidDirection { distance: f64 },

    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error("loss function is not nondecreasing on [0, inf): l({x0}) = {y0} > l({x1}) = {y1}")]
    NonMonotoneLoss { x0: f64, y0: f64, x1: f64, y1: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
