use thiserror::Error;

/// Errors raised by collar construction, field calculus and tensor assembly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollarError {
    /// The annulus `c⁻¹|t| < |z| < c` is empty.
    #[error("empty collar: |t| = {t_abs:e} is not below c² = {c_sq}")]
    EmptyDomain { t_abs: f64, c_sq: f64 },

    #[error("cut must lie in (0, 1), got {0}")]
    InvalidCut(f64),

    #[error("collar width must be positive and resolvable in f64, got u = {0}")]
    InvalidWidth(f64),

    #[error("tau = {tau} lies outside the collar interval ({lo}, {hi})")]
    OutOfDomain { tau: f64, lo: f64, hi: f64 },

    #[error("grid resolution {0} must be a multiple of 4 and at least 64")]
    InvalidResolution(usize),

    /// Two fields (or a field and a solver) disagree on their collar grid.
    #[error("grid mismatch between collar fields")]
    GridMismatch,

    #[error("under-resolved field: {0}")]
    UnderResolved(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("coefficient bound violated: {0}")]
    CoefficientBound(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("singular matrix ({0})")]
    Singular(String),

    #[error("Green solve residual {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("unsupported norm order {0} (at most 2)")]
    UnsupportedOrder(usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, CollarError>;
