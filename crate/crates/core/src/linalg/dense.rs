//! Dense symmetric eigensolvers used as a verification oracle.
//!
//! Matrices are square, row-major, stored in a flat `Vec<f64>`.

use crate::assembly::SymSparseMatrix;
use crate::error::{Error, Result};

/// Lower Cholesky factor restricted to the matrix envelope: row `i` holds
/// columns `first[i]..=i`.
pub(crate) struct EnvelopeCholesky {
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl EnvelopeCholesky {
    pub(crate) fn factor(m: &SymSparseMatrix) -> Result<Self> {
        let n = m.dim();
        let first: Vec<usize> = (0..n).map(|i| m.first_column(i)).collect();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let fi = first[i];
            let mut row = vec![0.0; i - fi + 1];
            for (j, v) in m.row(i) {
                if j <= i {
                    row[j - fi] = v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let lj = &rows[j];
                let mut s = row[j - fi];
                for k in start..j {
                    s -= row[k - fi] * lj[k - fj];
                }
                row[j - fi] = s / lj[j - fj];
            }
            let mut d = row[i - fi];
            for k in fi..i {
                d -= row[k - fi] * row[k - fi];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d });
            }
            row[i - fi] = d.sqrt();
            rows.push(row);
        }
        Ok(EnvelopeCholesky { first, rows })
    }

    /// Replaces every column of the dense `n × n` matrix `x` by `L⁻¹ x`.
    fn forward_rows(&self, x: &mut [f64], n: usize) {
        for i in 0..n {
            let fi = self.first[i];
            let (done, rest) = x.split_at_mut(i * n);
            let target = &mut rest[..n];
            for k in fi..i {
                let l = self.rows[i][k - fi];
                if l != 0.0 {
                    let src = &done[k * n..(k + 1) * n];
                    for (t, s) in target.iter_mut().zip(src) {
                        *t -= l * s;
                    }
                }
            }
            let inv = 1.0 / self.rows[i][i - fi];
            target.iter_mut().for_each(|t| *t *= inv);
        }
    }

    /// Solves `Lᵀ x = y` in place.
    fn backward(&self, y: &mut [f64]) {
        for i in (0..y.len()).rev() {
            let fi = self.first[i];
            let row = &self.rows[i];
            y[i] /= row[i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= row[k - fi] * xi;
            }
        }
    }

    /// Dense `L⁻¹ A L⁻ᵀ`, symmetrized.
    fn reduce(&self, a: &SymSparseMatrix) -> Vec<f64> {
        let n = a.dim();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                c[i * n + j] = v;
            }
        }
        self.forward_rows(&mut c, n);
        transpose_in_place(&mut c, n);
        self.forward_rows(&mut c, n);
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (c[i * n + j] + c[j * n + i]);
                c[i * n + j] = s;
                c[j * n + i] = s;
            }
        }
        c
    }
}

fn transpose_in_place(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            a.swap(i * n + j, j * n + i);
        }
    }
}

/// All eigenpairs of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and the eigenvectors as rows.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = f64::EPSILON * frob;

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // eigenvectors kept as rows of v
                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - s * vq;
                    v[q * n + k] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = (0..n).map(|i| v[i * n..(i + 1) * n].to_vec()).collect();
    (values, vectors)
}

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
/// Only the lower triangle of `a` is read; reflector vectors are left in
/// the strictly lower part.
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    n: usize,
    reflectors: Vec<f64>,
}

impl Tridiagonal {
    pub fn reduce(mut a: Vec<f64>, n: usize) -> Self {
        assert_eq!(a.len(), n * n);
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let base = k + 1;
            let mut norm_sq = 0.0;
            for i in 0..m {
                let x = a[(base + i) * n + k];
                v[i] = x;
                norm_sq += x * x;
            }
            let norm = norm_sq.sqrt();
            if norm == 0.0 {
                off[k] = 0.0;
                for i in 0..m {
                    a[(base + i) * n + k] = 0.0;
                }
                continue;
            }
            let alpha = if v[0] > 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm = v[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
            v[..m].iter_mut().for_each(|x| *x /= vnorm);
            off[k] = alpha;

            // p = A22 v from the lower triangle
            p[..m].iter_mut().for_each(|x| *x = 0.0);
            for i in 0..m {
                let row = &a[(base + i) * n + base..(base + i) * n + base + i + 1];
                let vi = v[i];
                let mut s = row[i] * vi;
                for j in 0..i {
                    s += row[j] * v[j];
                    p[j] += row[j] * vi;
                }
                p[i] += s;
            }
            let kappa: f64 = (0..m).map(|i| v[i] * p[i]).sum();
            for i in 0..m {
                p[i] = 2.0 * p[i] - 2.0 * kappa * v[i];
            }
            for i in 0..m {
                let (vi, wi) = (v[i], p[i]);
                let row = &mut a[(base + i) * n + base..(base + i) * n + base + i + 1];
                for j in 0..=i {
                    row[j] -= vi * p[j] + wi * v[j];
                }
            }
            for i in 0..m {
                a[(base + i) * n + k] = v[i];
            }
        }
        if n >= 2 {
            off[n - 2] = a[(n - 1) * n + n - 2];
        }
        let diag = (0..n).map(|i| a[i * n + i]).collect();
        Tridiagonal {
            diag,
            off,
            n,
            reflectors: a,
        }
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - sigma - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + sigma.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by bisection on the Sturm count.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..self.n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < self.n {
                    self.off[i].abs()
                } else {
                    0.0
                };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector of the tridiagonal matrix for eigenvalue `lambda`,
    /// by inverse iteration with a pivoted tridiagonal solve.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.n;
        let mut z: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i % 7) as f64)).collect();
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for _ in 0..3 {
            z = solve_shifted_tridiagonal(&self.diag, &self.off, lambda, &z, scale);
            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            z.iter_mut().for_each(|x| *x /= norm);
        }
        z
    }

    /// Maps an eigenvector of the tridiagonal matrix back to the original basis.
    pub fn back_transform(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = z.to_vec();
        for k in (0..n.saturating_sub(2)).rev() {
            let base = k + 1;
            let mut s = 0.0;
            for i in base..n {
                s += self.reflectors[i * n + k] * y[i];
            }
            for i in base..n {
                y[i] -= 2.0 * s * self.reflectors[i * n + k];
            }
        }
        y
    }
}

/// Solves `(T - shift I) x = b` by Gaussian elimination with partial
/// pivoting; exact zero pivots are perturbed so the near-singular solves of
/// inverse iteration stay finite.
fn solve_shifted_tridiagonal(
    diag: &[f64],
    off: &[f64],
    shift: f64,
    b: &[f64],
    scale: f64,
) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * scale;
    let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
    let dl = off.to_vec();
    let mut du = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut rhs = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let old_du = du[i];
            du[i] = d[i + 1];
            d[i + 1] = old_du - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            rhs.swap(i, i + 1);
            rhs[i + 1] -= fact * rhs[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

/// Which dense symmetric eigensolver handles the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseMethod {
    /// Jacobi up to [`JACOBI_MAX_DIM`], Householder tridiagonalization above.
    Auto,
    Jacobi,
    Tridiagonal,
}

pub const JACOBI_MAX_DIM: usize = 300;

/// Smallest eigenpair of `A x = λ M x` with `M` positive definite.
/// Returns `(λ, x)` with `xᵀ M x = 1` up to rounding.
pub(crate) fn generalized_smallest(
    a: &SymSparseMatrix,
    m: &SymSparseMatrix,
    method: DenseMethod,
) -> Result<(f64, Vec<f64>)> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::invalid("matrix", "empty eigenproblem"));
    }
    let chol = EnvelopeCholesky::factor(m)?;
    let c = chol.reduce(a);
    let use_jacobi = match method {
        DenseMethod::Auto => n <= JACOBI_MAX_DIM,
        DenseMethod::Jacobi => true,
        DenseMethod::Tridiagonal => false,
    };
    let (lambda, mut y) = if use_jacobi {
        let (values, vectors) = jacobi_eigen(&c, n);
        let k = (0..n)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .unwrap();
        (values[k], vectors[k].clone())
    } else {
        let t = Tridiagonal::reduce(c, n);
        let lambda = t.smallest_eigenvalue();
        let z = t.eigenvector(lambda);
        (lambda, t.back_transform(&z))
    };
    chol.backward(&mut y);
    Ok((lambda, y))
}
