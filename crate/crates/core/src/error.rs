use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples but the grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("density not admissible: value {value:e} at index {index} is below the floor {floor:e}")]
    Node { index: usize, value: f64, floor: f64 },

    #[error("field is not normalized: integral {mass} (tolerance {tolerance:e})")]
    NotNormalized { mass: f64, tolerance: f64 },

    #[error("phase under-resolved: neighbor jump {jump} at index {index} reaches pi/2")]
    Alias { index: usize, jump: f64 },

    #[error("wave function winds {0} times around the circle; no single-valued phase exists")]
    Winding(i64),

    #[error("source term integrates to {0:e}, expected zero")]
    Compatibility(f64),

    #[error("tangent vectors are based at different densities")]
    BaseMismatch,

    #[error("map folds: 1 + t psi'' = {value} at index {index}")]
    Fold { index: usize, value: f64 },

    #[error("integration unstable: {0}")]
    Stability(String),

    #[error("phase gauge violated: {0}")]
    Gauge(String),

    #[error("density carries mass {mass:e} near the transport cut (limit {limit:e})")]
    Cut { mass: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Config(err.to_string())
    }
}
