use thiserror::Error;

/// Errors raised by the sampling, geometry, algebra and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("intensity {next} must be strictly greater than the current top intensity {top}")]
    Ordering { top: f64, next: f64 },

    #[error("degenerate input: need at least {needed} points in dimension {dim}, got {got}")]
    DegenerateInput { needed: usize, dim: usize, got: usize },

    #[error("general position violated: {0}")]
    GeneralPosition(String),

    #[error("point {0} is not a vertex of the hull")]
    NotAVertex(usize),

    #[error("reference point is not strictly inside the polytope")]
    InvalidOrigin,

    #[error(
        "intensity {lambda} is below the admissible threshold in dimension {dim} \
         (critical radius needs lambda >= {min_lambda:.6})"
    )]
    BelowThreshold { lambda: f64, dim: usize, min_lambda: f64 },

    #[error("point outside the rescaled window: {0}")]
    Domain(String),

    #[error("mismatched intensity context: {0} vs {1}")]
    Context(f64, f64),

    #[error("argument out of the supported range: {0}")]
    Range(String),

    #[error("insufficient data: need more than {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("y = {y} lies outside the validity window [0, {limit}]")]
    Window { y: f64, limit: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
