use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty sample set: {0}")]
    EmptySample(String),

    #[error("margin {margin} leaves an empty subdomain (inradius {inradius})")]
    EmptySubdomain { margin: f64, inradius: f64 },

    #[error("non-finite field value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("ball B({center:?}; {radius}) is not contained in the admissible region (boundary distance {distance})")]
    BallNotContained {
        center: Vec<f64>,
        radius: f64,
        distance: f64,
    },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("grid spacing {spacing} too coarse: {cells} cells across the inradius, need at least {required}")]
    SpacingTooCoarse {
        spacing: f64,
        cells: f64,
        required: f64,
    },

    #[error("kernel degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
