use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("inverse Laplacian undefined on means (mean {mean:e}, norm {norm:e})")]
    NonZeroMean { mean: f64, norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("under-resolved kernel: alpha = {alpha} needs at least {min_alpha} on this grid")]
    UnderResolvedKernel { alpha: f64, min_alpha: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds the admissible dt = {admissible:e}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("non-finite values detected at t = {t}")]
    Blowup { t: f64 },

    #[error("run at eps = {eps:e} failed: {source}")]
    Sweep {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
