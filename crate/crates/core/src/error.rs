use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds tolerance {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("symmetric eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("matrix function undefined at eigenvalue {eigenvalue:e}")]
    Singularity { eigenvalue: f64 },

    #[error("{what} is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    #[error("coarse-graining map has rank {rank}, expected full row rank {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("time step {dt:e} is unstable for drift with largest eigenvalue {max_eigenvalue:e}; need dt < {max_dt:e}")]
    Unstable {
        dt: f64,
        max_eigenvalue: f64,
        max_dt: f64,
    },

    #[error("lag grids differ: {0}")]
    GridMismatch(String),

    #[error("lag {lag} is not usable with this ensemble: {reason}")]
    LagOutOfRange { lag: f64, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(context: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected,
            found,
        })
    }
}
