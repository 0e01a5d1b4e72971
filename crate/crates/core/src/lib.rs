//! Inverse iteration for principal Laplace eigenpairs with Robin, mixed
//! Dirichlet–Neumann and optimal-insulation boundary conditions, on
//! piecewise-linear finite elements.
//!
//! The iteration solves one Poisson problem per step,
//! `A u_{k+1} = R(u_k) M u_k`, with no renormalization. Along the way it
//! records the quantities that are provably monotone (Rayleigh quotient,
//! L² norm, energy norm and their products) so a run can be audited.

pub mod assembly;
pub mod baselines;
pub mod error;
pub mod iteration;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};
