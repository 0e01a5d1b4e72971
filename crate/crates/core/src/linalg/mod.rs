//! Sparse SPD solves and a dense generalized eigensolver used as an oracle.

mod cg;
mod dense;

pub use cg::solve_spd;
pub use dense::{jacobi_eigen, DenseMethod, Tridiagonal, JACOBI_MAX_DIM};

use crate::assembly::{norm2, DirichletConstraint, SymSparseMatrix};
use crate::error::{Error, Result};

/// Conjugate-gradient settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual target `‖Ax − b‖ ≤ tolerance · ‖b‖`.
    pub tolerance: f64,
    /// Iteration cap; `None` means ten times the dimension.
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid(
                "tolerance",
                format!("{} not in (0, 1)", self.tolerance),
            ));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    pub fn max_iterations_for(&self, dim: usize) -> usize {
        self.max_iterations.unwrap_or(10 * dim.max(1))
    }
}

/// Largest dimension accepted by [`dense_smallest_eigpair`].
pub const DENSE_ORACLE_MAX_DIM: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// `M`-normalized, with positive `M`-weighted mean.
    pub vector: Vec<f64>,
}

/// Smallest eigenpair of `A u = λ M u`, restricted to vectors vanishing on
/// the constrained indices when a constraint is given.
///
/// Densifies the free block, reduces with the Cholesky factor of `M` and
/// solves the standard symmetric problem.
pub fn dense_smallest_eigpair(
    a: &SymSparseMatrix,
    m: &SymSparseMatrix,
    constraint: Option<&DirichletConstraint>,
) -> Result<EigenPair> {
    dense_smallest_eigpair_with(a, m, constraint, DenseMethod::Auto)
}

pub fn dense_smallest_eigpair_with(
    a: &SymSparseMatrix,
    m: &SymSparseMatrix,
    constraint: Option<&DirichletConstraint>,
    method: DenseMethod,
) -> Result<EigenPair> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m.dim(),
        });
    }
    if n > DENSE_ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            limit: DENSE_ORACLE_MAX_DIM,
        });
    }
    let free = match constraint {
        Some(c) => {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: c.dim(),
                });
            }
            c.free_indices()
        }
        None => (0..n).collect(),
    };
    let (value, reduced) =
        dense::generalized_smallest(&a.submatrix(&free), &m.submatrix(&free), method)?;

    let mut vector = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        vector[i] = reduced[k];
    }
    let scale = m.quad_form(&vector).sqrt();
    let mean: f64 = m.matvec(&vector).iter().sum();
    let scale = if mean < 0.0 { -scale } else { scale };
    vector.iter_mut().for_each(|x| *x /= scale);
    Ok(EigenPair { value, vector })
}

/// `‖A u − λ M u‖₂`.
pub fn eigen_residual(a: &SymSparseMatrix, m: &SymSparseMatrix, pair: &EigenPair) -> f64 {
    let au = a.matvec(&pair.vector);
    let mu = m.matvec(&pair.vector);
    let r: Vec<f64> = au
        .iter()
        .zip(&mu)
        .map(|(x, y)| x - pair.value * y)
        .collect();
    norm2(&r)
}
