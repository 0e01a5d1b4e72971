use crate::error::{Error, Result};

/// Square symmetric matrix in compressed sparse row form, storing both
/// triangles. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymSparseMatrix {
    /// Sums duplicate entries in the order they appear, so that mirrored
    /// entries built from symmetric local blocks come out bit-identical.
    pub(crate) fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SymSparseMatrix {
            dim: n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: diag.to_vec(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        SymSparseMatrix {
            dim: n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from dense rows; zero entries are dropped. The input must be
    /// exactly symmetric.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != rows[j][i] {
                    return Err(Error::invalid(
                        "matrix",
                        format!("entry ({i}, {j}) differs from ({j}, {i})"),
                    ));
                }
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Ok(Self::from_triplets(n, triplets))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Smallest stored column index in row `i`, or `i` for an empty row.
    pub(crate) fn first_column(&self, i: usize) -> usize {
        let start = self.row_ptr[i];
        if start < self.row_ptr[i + 1] {
            self.cols[start].min(i)
        } else {
            i
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| x[i] * self.row(i).map(|(j, a)| a * y[j]).sum::<f64>())
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn add(&self, other: &SymSparseMatrix) -> Result<SymSparseMatrix> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for m in [self, other] {
            for i in 0..m.dim {
                triplets.extend(m.row(i).map(|(j, v)| (i, j, v)));
            }
        }
        Ok(Self::from_triplets(self.dim, triplets))
    }

    pub fn scaled(&self, c: f64) -> SymSparseMatrix {
        SymSparseMatrix {
            vals: self.vals.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Principal submatrix on `keep` (sorted indices), as a sparse matrix.
    pub fn submatrix(&self, keep: &[usize]) -> SymSparseMatrix {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    triplets.push((new_i, map[j], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets)
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SymSparseMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (0, 0, 3.0)],
        );
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
        assert!(a.is_symmetric());
    }

    #[test]
    fn dense_round_trip_and_matvec() {
        let rows = vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ];
        let a = SymSparseMatrix::from_dense(&rows).unwrap();
        assert_eq!(a.to_dense(), rows);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 1.0]);
        assert_eq!(a.quad_form(&[1.0, 1.0, 1.0]), 2.0);
    }

    #[test]
    fn asymmetric_dense_rejected() {
        assert!(SymSparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
    }

    #[test]
    fn add_and_submatrix() {
        let a = SymSparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let b = SymSparseMatrix::identity(2);
        let c = a.add(&b).unwrap();
        assert_eq!(c.to_dense(), vec![vec![2.0, 2.0], vec![2.0, 6.0]]);
        assert_eq!(c.submatrix(&[1]).to_dense(), vec![vec![6.0]]);
        assert!(a.add(&SymSparseMatrix::identity(3)).is_err());
    }
}
