use super::SolverConfig;
use crate::assembly::{dot, norm2, SymSparseMatrix};
use crate::error::{Error, Result};

const MAX_RESTARTS: usize = 8;

/// Solves `A x = b` for symmetric positive definite `A` by conjugate
/// gradients with a diagonal preconditioner, starting from `x = 0`.
///
/// Convergence is judged on the recursively updated residual and then
/// confirmed against the true residual `b - A x`; a mismatch restarts the
/// iteration from the current iterate.
pub fn solve_spd(a: &SymSparseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let mut inv_diag = Vec::with_capacity(n);
    for (i, d) in a.diagonal().into_iter().enumerate() {
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { row: i, pivot: d });
        }
        inv_diag.push(1.0 / d);
    }

    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = cfg.tolerance * b_norm;
    let max_iter = cfg.max_iterations_for(n);

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    for _ in 0..=MAX_RESTARTS {
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);

        while norm2(&r) > target {
            if iterations == max_iter {
                return Err(Error::NotConverged {
                    iterations,
                    residual: true_residual(a, &x, b) / b_norm,
                });
            }
            iterations += 1;
            a.matvec_into(&p, &mut ap);
            let curvature = dot(&p, &ap);
            if !(curvature > 0.0) {
                return Err(Error::Indefinite {
                    iteration: iterations,
                    curvature,
                });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                z[i] = inv_diag[i] * r[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }

        let ax = a.matvec(&x);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
        if norm2(&r) <= target {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations,
        residual: true_residual(a, &x, b) / b_norm,
    })
}

fn true_residual(a: &SymSparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    ax.iter()
        .zip(b)
        .map(|(p, q)| (q - p) * (q - p))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::assembly::{assemble_boundary_mass, assemble_stiffness, BoundaryProfile};
    use crate::mesh::{generate_unit_square, BoundaryTag};

    #[test]
    fn identity_and_diagonal() {
        let cfg = SolverConfig::default();
        let b = [3.0, -1.0, 0.5];
        assert_eq!(
            solve_spd(&SymSparseMatrix::identity(3), &b, &cfg).unwrap(),
            b
        );
        let a = SymSparseMatrix::from_diagonal(&[2.0, 2.0]);
        let x = solve_spd(&a, &[2.0, 4.0], &cfg).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn robin_operator_residual() {
        let mesh = generate_unit_square(4).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let h = BoundaryProfile::constant(&mesh, BoundaryTag::RobinAll, 1.0).unwrap();
        let a = k.add(&assemble_boundary_mass(&mesh, &h).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = SolverConfig::default();
        let x = solve_spd(&a, &b, &cfg).unwrap();
        assert!(true_residual(&a, &x, &b) <= 1e-12 * norm2(&b));
        assert_eq!(solve_spd(&a, &b, &cfg).unwrap(), x);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = SymSparseMatrix::identity(4);
        assert_eq!(
            solve_spd(&a, &[0.0; 4], &SolverConfig::default()).unwrap(),
            vec![0.0; 4]
        );
    }

    #[test]
    fn indefinite_detected() {
        let a = SymSparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let err = solve_spd(&a, &[1.0, -1.0], &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Indefinite { .. }), "{err}");
        let neg = SymSparseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(solve_spd(&neg, &[1.0, 1.0], &SolverConfig::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let mesh = generate_unit_square(6).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let h = BoundaryProfile::constant(&mesh, BoundaryTag::RobinAll, 1.0).unwrap();
        let a = k.add(&assemble_boundary_mass(&mesh, &h).unwrap()).unwrap();
        let b = vec![1.0; a.dim()];
        let cfg = SolverConfig {
            tolerance: 1e-12,
            max_iterations: Some(2),
        };
        match solve_spd(&a, &b, &cfg) {
            Err(Error::NotConverged {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
