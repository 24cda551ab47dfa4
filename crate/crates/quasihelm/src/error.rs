use num_complex::Complex64;
use thiserror::Error;

/// Solver failures. Each variant knows which module raised it so the CLI can
/// tag its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("[{module}] invalid input: {reason}")]
    InvalidInput { module: &'static str, reason: String },

    #[error("[{module}] singular linear system (smallest pivot magnitude {min_pivot:.3e})")]
    Singular { module: &'static str, min_pivot: f64 },

    #[error("[riccati] companion mass matrix is numerically singular (smallest singular value {smallest:.3e}, largest {largest:.3e})")]
    SingularPencil { smallest: f64, largest: f64 },

    #[error("[riccati] eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("[riccati] eigenpair {index} residual {residual:.3e} exceeds {tolerance:.1e}")]
    EigenResidual { index: usize, residual: f64, tolerance: f64 },

    #[error("[riccati] found {inside} eigenvalues inside the unit disk, expected {expected}; closest to the unit circle: {nearest:?}")]
    UnitDiskCount { inside: usize, expected: usize, nearest: Vec<Complex64> },

    #[error("[riccati] eigenvalue {lambda} lies within {margin:.1e} of the unit circle")]
    UnitCircle { lambda: Complex64, margin: f64 },

    #[error("[riccati] selected eigenvector matrix has condition number {cond:.3e} (limit {limit:.1e}); propagator is not diagonalizable in practice")]
    Diagonalizability { cond: f64, limit: f64 },

    #[error("[halfguide] non-physical impedance sign: Im(lambda) = {} must be negative", .lambda.im)]
    NonphysicalSign { lambda: Complex64 },

    #[error("[oracle] reference requires {dofs} unknowns, over the budget of {budget}; try a truncation target of about {suggested_target:.1e}")]
    MemoryBudget { dofs: usize, budget: usize, suggested_target: f64 },

    #[error("[oracle] reference solution has zero H1 norm on the window")]
    ZeroNorm,

    #[error("[oracle] half-line trace vanished at s = {s}")]
    ZeroTrace { s: f64 },
}

impl Error {
    /// Short module tag ("fem-core", "riccati", ...).
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidInput { module, .. } | Error::Singular { module, .. } => module,
            Error::SingularPencil { .. }
            | Error::Eigensolver(_)
            | Error::EigenResidual { .. }
            | Error::UnitDiskCount { .. }
            | Error::UnitCircle { .. }
            | Error::Diagonalizability { .. } => "riccati",
            Error::NonphysicalSign { .. } => "halfguide",
            Error::MemoryBudget { .. } | Error::ZeroNorm | Error::ZeroTrace { .. } => "oracle",
        }
    }

    pub(crate) fn invalid(module: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            module,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
