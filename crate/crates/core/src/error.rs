use thiserror::Error;

pub type Result<T, E = HhError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HhError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) lies outside the domain of {what}")]
    OutOfDomain { what: &'static str, x: f64, y: f64 },

    #[error("inradius linear program failed: {0}")]
    LpFailure(String),

    #[error("geometry invariant violated: {0}")]
    GeometryInvariant(String),

    #[error("grid spacing h = {h} is too coarse ({reason}); use h <= {suggested}")]
    GridTooCoarse {
        h: f64,
        suggested: f64,
        reason: &'static str,
    },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("boundary gradient stencil failed at {skipped} of {total} boundary samples")]
    StencilFailure { skipped: usize, total: usize },

    #[error("torsion summary is untrusted: {0}")]
    Untrusted(String),

    #[error("test function `{name}` is negative ({value:e}) at ({x}, {y})")]
    CertificateViolation {
        name: String,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
