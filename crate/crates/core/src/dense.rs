//! Row-major dense matrices.
//!
//! Products go through `matrixmultiply`'s packed GEMM kernels, which are
//! single-threaded and therefore bit-stable between runs.

use faer::Mat;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major values, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_row_major(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                n_rows,
                n_cols
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry ({}, {})",
                pos / n_cols.max(1),
                pos % n_cols.max(1)
            )));
        }
        Ok(DenseMatrix {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), n_cols, rows.concat())
    }

    pub(crate) fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                values.push(f(i, j));
            }
        }
        DenseMatrix {
            n_rows,
            n_cols,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        gemm(
            (self.n_rows, self.n_cols, other.n_cols),
            &self.values,
            (self.n_cols as isize, 1),
            &other.values,
            (other.n_cols as isize, 1),
            &mut out.values,
        );
        Ok(out)
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_rows != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "({}x{})ᵀ times {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_cols, other.n_cols);
        gemm(
            (self.n_cols, self.n_rows, other.n_cols),
            &self.values,
            (1, self.n_cols as isize),
            &other.values,
            (other.n_cols as isize, 1),
            &mut out.values,
        );
        Ok(out)
    }

    /// `self * otherᵀ`.
    pub fn matmul_t(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times ({}x{})ᵀ",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_rows);
        gemm(
            (self.n_rows, self.n_cols, other.n_rows),
            &self.values,
            (self.n_cols as isize, 1),
            &other.values,
            (1, other.n_cols as isize),
            &mut out.values,
        );
        Ok(out)
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> DenseMatrix {
        assert_eq!(scale.len(), self.n_cols, "one scale factor per column");
        let mut out = self.clone();
        for row in out.values.chunks_mut(self.n_cols.max(1)) {
            for (v, s) in row.iter_mut().zip(scale) {
                *v *= s;
            }
        }
        out
    }

    /// Keeps the leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> DenseMatrix {
        assert!(k <= self.n_cols);
        DenseMatrix::from_fn(self.n_rows, k, |i, j| self.get(i, j))
    }

    pub fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        DenseMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            values,
        }
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_rows != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate {} rows with {} rows",
                self.n_rows, other.n_rows
            )));
        }
        let mut values = Vec::with_capacity(self.n_rows * (self.n_cols + other.n_cols));
        for i in 0..self.n_rows {
            values.extend_from_slice(self.row(i));
            values.extend_from_slice(other.row(i));
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols + other.n_cols,
            values,
        })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch("shape mismatch in subtraction".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.n_rows, self.n_cols, |i, j| self.get(i, j))
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, f64>) -> DenseMatrix {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// `c = a * b` for an `m x k` by `k x n` product with arbitrary strides on
/// `a` and `b`; `c` is row-major and overwritten.
fn gemm(
    (m, k, n): (usize, usize, usize),
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.fill(0.0);
        return;
    }
    // SAFETY: callers pass slices whose extents match the given dimensions
    // and strides; all shape checks happen before this point.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.n_rows(), b.n_cols(), |i, j| {
            (0..a.n_cols()).map(|l| a.get(i, l) * b.get(l, j)).sum()
        })
    }

    fn sample(r: usize, c: usize, salt: f64) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |i, j| ((i * 7 + j * 3) as f64 + salt).sin())
    }

    #[test]
    fn products_match_naive() {
        let a = sample(5, 4, 0.1);
        let b = sample(4, 3, 0.7);
        let c = sample(5, 3, 1.3);
        let diff = |x: &DenseMatrix, y: &DenseMatrix| x.sub(y).unwrap().max_abs();
        assert!(diff(&a.matmul(&b).unwrap(), &naive(&a, &b)) < 1e-12);
        assert!(diff(&a.t_matmul(&c).unwrap(), &naive(&a.transpose(), &c)) < 1e-12);
        assert!(diff(&a.matmul_t(&a).unwrap(), &naive(&a, &a.transpose())) < 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0]).is_err());
        assert!(sample(2, 3, 0.0).matmul(&sample(2, 3, 0.0)).is_err());
    }

    #[test]
    fn hcat_places_blocks() {
        let a = sample(3, 2, 0.0);
        let b = sample(3, 1, 5.0);
        let c = a.hcat(&b).unwrap();
        assert_eq!(c.shape(), (3, 3));
        assert_eq!(c.get(2, 1), a.get(2, 1));
        assert_eq!(c.get(2, 2), b.get(2, 0));
        assert!(a.hcat(&sample(2, 1, 0.0)).is_err());
    }
}
