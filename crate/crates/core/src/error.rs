use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("state {0:?} is not part of the sector basis")]
    StateNotInBasis(Vec<usize>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigendecomposition residual {residual:e} exceeds {tolerance:e}")]
    Eigendecomposition { residual: f64, tolerance: f64 },

    #[error("quadrature did not converge: estimated error {error:e} for value {value:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("kernel undefined at zero coupling")]
    ZeroCoupling,

    #[error("pole of the asymptotic formula: {0}")]
    Pole(String),

    #[error("reservoir window too narrow: boundary modes carry {fraction:.3e} of the response")]
    WindowTooNarrow { fraction: f64 },

    #[error("bisection interval [{lo}, {hi}] does not bracket a root")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("root residual {residual:e} exceeds {tolerance:e}")]
    RootResidual { residual: f64, tolerance: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration path leaves the grid at t={t}: ({q1}, {q2})")]
    PathOutsideGrid { t: f64, q1: f64, q2: f64 },

    #[error("force evaluation touches a masked node at t={t}: ({q1}, {q2})")]
    MaskedRegion { t: f64, q1: f64, q2: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
