//! Compressed sparse row storage for the assembled finite element matrices.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` entries, summing duplicates.
    ///
    /// Duplicates are summed in the order they appear in `entries`, so the
    /// result is bit-reproducible for a fixed input sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&e| (entries[e].0, entries[e].1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for e in order {
            let (r, c, v) = entries[e];
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                if dense[(i, j)] != 0.0 {
                    entries.push((i, j, dense[(i, j)]));
                }
            }
        }
        Self::from_triplets(dense.nrows(), dense.ncols(), &entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn checked_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Dimension { expected: self.ncols, got: x.len() });
        }
        Ok(self.mul_vec(x))
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &entries)
    }

    /// `alpha * self + beta * other` on the union of both patterns.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(indices.capacity());
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut a, mut b) = (0, 0);
            while a < ca.len() || b < cb.len() {
                let col_a = ca.get(a).copied().unwrap_or(usize::MAX);
                let col_b = cb.get(b).copied().unwrap_or(usize::MAX);
                if col_a == col_b {
                    indices.push(col_a);
                    values.push(alpha * va[a] + beta * vb[b]);
                    a += 1;
                    b += 1;
                } else if col_a < col_b {
                    indices.push(col_a);
                    values.push(alpha * va[a]);
                    a += 1;
                } else {
                    indices.push(col_b);
                    values.push(beta * vb[b]);
                    b += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `‖A − Aᵀ‖_F`.
    pub fn asymmetry(&self) -> f64 {
        self.linear_combination(1.0, &self.transpose(), -1.0).frobenius_norm()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.nrows == self.ncols && self.asymmetry() <= rel_tol * self.frobenius_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, 2.0]);
        assert_eq!(m.transpose().get(0, 1), 2.0);
    }

    #[test]
    fn linear_combination_unions_patterns() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]);
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0), (1, 1, 3.0)]);
        let c = a.linear_combination(2.0, &b, -1.0);
        assert_eq!(c.to_dense(), DMatrix::from_row_slice(2, 2, &[2.0, -2.0, 0.0, -1.0]));
        assert!(!b.is_symmetric(1e-12));
        assert!(a.is_symmetric(0.0));
    }

    #[test]
    fn matrix_market_dump() {
        let m = CsrMatrix::identity(2);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 "));
    }
}
