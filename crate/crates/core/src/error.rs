use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate element: triangle {index} has non-positive area {area:e}")]
    DegenerateElement { index: usize, area: f64 },

    #[error("coefficient must stay positive: a({x}, {y}) = {value}")]
    NonPositiveCoefficient { x: f64, y: f64, value: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("unsupported mesh: {0}")]
    UnsupportedMesh(String),

    #[error("problem size {n} exceeds the configured limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error(
        "lattice assignment failed after {retries} refinements ({nodes} nodes, {sites} sites)"
    )]
    LatticeAssignment {
        retries: usize,
        nodes: usize,
        sites: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
