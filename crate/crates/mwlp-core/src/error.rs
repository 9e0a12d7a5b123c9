//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by grid, weight, and transform operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A symmetric matrix was not positive definite within the PD tolerance.
    #[error("matrix not positive definite (min eigenvalue {min_eig:e}, threshold {threshold:e})")]
    NotPositiveDefinite { min_eig: f64, threshold: f64 },

    /// A dyadic cube contained no grid cells at the working resolution.
    #[error("cube {cube} contains no grid cell at resolution 2^{grid_j}")]
    EmptyCube { cube: String, grid_j: u32 },

    /// Khachiyan iteration failed to reach tolerance within the iteration cap.
    #[error("minimum-volume ellipsoid iteration did not converge after {iterations} iterations (gap {gap:e})")]
    MveeNonConvergence { iterations: usize, gap: f64 },

    /// A scale index fell outside the usable range of the system or grid.
    #[error("scale j={j} outside usable range [{jmin}, {jmax}]")]
    ScaleOutOfRange { j: i32, jmin: i32, jmax: i32 },

    /// A reducing family was queried for a cube it does not cover.
    #[error("reducing family has no matrix for cube {cube}")]
    MissingCube { cube: String },

    /// Two geometric objects had different ambient dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An inequality experiment's hypothesis quantity blew up.
    #[error("hypothesis quantity {value:e} exceeds blow-up threshold {threshold:e}")]
    HypothesisUnverifiable { value: f64, threshold: f64 },

    /// Invalid argument outside the supported parameter domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
