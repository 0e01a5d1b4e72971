use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("mesh topology: {0}")]
    Topology(String),

    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("insulation profile must be strictly positive, got {value:e} at vertex {vertex}")]
    NonpositiveProfile { vertex: usize, value: f64 },

    #[error("insulation profile has no value at boundary vertex {0}")]
    MissingProfileValue(usize),

    #[error("boundary trace vanishes, the insulation profile is undefined")]
    DegenerateProfile,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error(
        "Rayleigh quotient of the initial vector vanishes, the iteration would collapse to zero"
    )]
    VanishingRayleigh,

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (curvature {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} in row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension {dim} exceeds the dense oracle limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("no sign change on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::Indefinite { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::DegenerateProfile
                | Error::VanishingRayleigh
        )
    }
}
