use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field contains non-finite samples")]
    NonFiniteField,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("density 1 + N vanishes or turns negative (min 1 + N = {min_density})")]
    VacuumDensity { min_density: f64 },

    #[error(
        "elliptic solve did not converge: residual {residual:e} after {iterations} iterations"
    )]
    EllipticNoConvergence { iterations: usize, residual: f64 },

    #[error("state does not belong to model {model}")]
    ModelMismatch { model: &'static str },

    #[error("signal too nonlinear: mode-2k/mode-k energy ratio {ratio:e}")]
    SignalTooNonlinear { ratio: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
