use thiserror::Error;

/// Errors produced by the curvature library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CasoratiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate basis: rank {rank} < {count} vectors")]
    DegenerateBasis { rank: usize, count: usize },

    #[error("basis is not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("hyperplane normal is not a unit vector (|norm - 1| = {deviation:.3e})")]
    NonUnitNormal { deviation: f64 },

    #[error("slant-plane search failed after {restarts} restarts (best deviation {best_deviation:.3e} rad)")]
    SlantSearchFailed {
        restarts: usize,
        best_deviation: f64,
    },

    #[error("parameter r = {r} is excluded: {reason}")]
    ExcludedParameter { r: f64, reason: String },

    #[error("oracle grid of {points} points exceeds the {limit} point budget")]
    OracleResolutionOverflow { points: u64, limit: u64 },

    #[error("internal invariant violated: {0}")]
    InternalCheck(String),
}

pub type Result<T> = std::result::Result<T, CasoratiError>;
