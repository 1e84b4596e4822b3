//! Column-major dense matrix.

use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Real matrix stored column by column.
///
/// Every constructor that accepts external data rejects NaN and infinite
/// entries, so code downstream can assume finiteness.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx % rows.max(1),
                col: idx / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Intended for literals in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self::new(m, n, data)
    }

    /// Builds a matrix by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `rows x cols` matrix with `diag` on the main diagonal (extra entries ignored).
    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut out = Self::zeros(rows, cols);
        for (i, &v) in diag.iter().enumerate().take(rows.min(cols)) {
            out[(i, i)] = v;
        }
        out
    }

    /// Assembles a matrix from equal-length columns.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert!(a < b && b < self.cols);
        let m = self.rows;
        let (lo, hi) = self.data.split_at_mut(b * m);
        (&mut lo[a * m..(a + 1) * m], &mut hi[..m])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of columns `range`.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Self {
        assert!(range.end <= self.cols);
        Self {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    /// Copy of the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Copy of rows `range`.
    pub fn row_block(&self, range: std::ops::Range<usize>) -> Self {
        assert!(range.end <= self.rows);
        let start = range.start;
        Self::from_fn(range.len(), self.cols, |i, j| self[(start + i, j)])
    }

    /// `[self, other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Scales column `j` by `s[j]`.
    pub fn scale_columns(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.cols);
        let mut out = self.clone();
        for (j, &sj) in s.iter().enumerate() {
            out.col_mut(j).iter_mut().for_each(|v| *v *= sj);
        }
        out
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.rows);
        let mut out = self.clone();
        for j in 0..self.cols {
            for (v, &si) in out.col_mut(j).iter_mut().zip(s) {
                *v *= si;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * rhs`, parallel over output columns when the `parallel`
    /// feature is on. Output is bitwise identical either way.
    pub fn matmul(&self, rhs: &Self) -> Self {
        #[cfg(feature = "parallel")]
        {
            self.matmul_par(rhs)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.matmul_seq(rhs)
        }
    }

    /// Single-threaded `self * rhs`.
    pub fn matmul_seq(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            gemv_col(self, rhs.col(j), out.col_mut(j));
        }
        out
    }

    #[cfg(feature = "parallel")]
    pub fn matmul_par(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        if self.rows == 0 {
            return out;
        }
        out.data
            .par_chunks_mut(self.rows)
            .enumerate()
            .for_each(|(j, dst)| gemv_col(self, rhs.col(j), dst));
        out
    }

    /// `selfᵀ * rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "t_matmul row mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        let fill = |j: usize, dst: &mut [f64]| {
            let b = rhs.col(j);
            for (i, d) in dst.iter_mut().enumerate() {
                *d = dot(self.col(i), b);
            }
        };
        #[cfg(feature = "parallel")]
        {
            if self.cols > 0 {
                out.data
                    .par_chunks_mut(self.cols)
                    .enumerate()
                    .for_each(|(j, dst)| fill(j, dst));
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            for j in 0..rhs.cols {
                let start = j * self.cols;
                fill(j, &mut out.data[start..start + self.cols]);
            }
        }
        out
    }

    /// `selfᵀ * self`.
    pub fn gram(&self) -> Self {
        self.t_matmul(self)
    }
}

fn gemv_col(a: &DenseMatrix, x: &[f64], dst: &mut [f64]) {
    for (l, &xl) in x.iter().enumerate() {
        if xl != 0.0 {
            axpy(xl, a.col(l), dst);
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(12) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_data() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            DenseMatrix::new(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[1.0, 0.0, 2.0], &[-1.0, 1.0, 0.5]]).unwrap();
        let c = a.matmul(&b);
        let expected =
            DenseMatrix::from_rows(&[&[-1.0, 2.0, 3.0], &[-1.0, 4.0, 8.0], &[-1.0, 6.0, 13.0]])
                .unwrap();
        assert_eq!(c, expected);
        assert_eq!(a.matmul_seq(&b), c);
        assert_eq!(a.t_matmul(&a), a.transpose().matmul(&a));
    }

    #[test]
    fn block_helpers() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        assert_eq!(a.columns(1..3).col(0), a.col(1));
        assert_eq!(a.row_block(2..4)[(0, 2)], a[(2, 2)]);
        assert_eq!(a.hstack(&a).cols(), 6);
        assert_eq!(a.select_columns(&[2, 0]).col(1), a.col(0));
    }
}
