use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular at working precision")]
    SingularMatrix,
    #[error("diagonally loaded covariance R + γI is singular at working precision")]
    SingularLoadedMatrix,
    #[error("reduced matrix W_Mᴴ(R + γI)W_M is singular at working precision")]
    SingularReducedMatrix,
    #[error("matrix has no entry above the zero threshold")]
    ZeroMatrix,
    #[error("basis already spans the whole {0}-dimensional space")]
    FullSpace(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("angle {0}° is outside the open interval (-90°, 90°)")]
    AngleOutOfRange(f64),
    #[error("degenerate angle range: theta1 = {theta1}° must be below theta2 = {theta2}°")]
    DegenerateRange { theta1: f64, theta2: f64 },
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("subspace dimension M = {m} exceeds the number of sensors N = {n}")]
    DimensionTooLarge { m: usize, n: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),
    #[error("snapshot batch is empty")]
    EmptyBatch,
    #[error("weight vector is zero")]
    ZeroWeight,
    #[error("projection onto the complement vanishes (norm {0:e})")]
    DegenerateDenominator(f64),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("{failed} of {total} trials failed at axis index {axis_index}; first failure in trial {trial}: {cause}")]
    TrialFailures {
        failed: usize,
        total: usize,
        axis_index: usize,
        trial: usize,
        cause: Box<Error>,
    },
}
