//! Dense matrix container and the geometric primitives shared by the solvers.
//!
//! All data handed to the cone routines is stored as points-as-columns.

use alloc::vec::Vec;
use core::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Axis, Error, Result};

/// A finite, non-empty dense matrix of `f64`.
///
/// Read access goes through `Deref` to the underlying [`DMatrix`]; mutation
/// only happens by constructing a new value, which re-checks the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: (rows, cols), found: (entries.len(), 1) });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from a list of equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        let rows = columns[0].len();
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch { expected: (rows, cols), found: (bad.len(), cols) });
        }
        Self::new(DMatrix::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    /// Wraps an nalgebra matrix, validating shape and finiteness.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                if !inner[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(DenseMatrix(inner))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// Column `j` as a contiguous slice (storage is column-major).
    pub fn col_slice(&self, j: usize) -> &[f64] {
        let r = self.0.nrows();
        &self.0.as_slice()[j * r..(j + 1) * r]
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self.0[(i, j)]).collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn transposed(&self) -> DenseMatrix {
        DenseMatrix(self.0.transpose())
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    /// True when every entry is `>= -tol`.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.0.iter().all(|&v| v >= -tol)
    }
}

impl Deref for DenseMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// A unit-L2 vector. Every vector produced in this crate is also nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_unit_unchecked(v: Vec<f64>) -> Self {
        UnitVector(v)
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A clean nonnegative data matrix (features × samples) with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    matrix: DenseMatrix,
    labels: Option<Vec<i64>>,
}

impl DataSet {
    /// Validates nonnegativity and the absence of all-zero rows and columns.
    pub fn new(matrix: DenseMatrix, labels: Option<Vec<i64>>) -> Result<Self> {
        check_clean(&matrix)?;
        if let Some(l) = &labels {
            if l.len() != matrix.cols() {
                return Err(Error::DimensionMismatch { expected: (matrix.cols(), 1), found: (l.len(), 1) });
            }
        }
        Ok(DataSet { matrix, labels })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn features(&self) -> usize {
        self.matrix.rows()
    }

    pub fn samples(&self) -> usize {
        self.matrix.cols()
    }
}

/// Checks the clean-data precondition: entries `>= 0`, no zero row, no zero column.
pub fn check_clean(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value: v });
            }
        }
    }
    if let Some(i) = (0..m.nrows()).find(|&i| m.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::DirtyData { axis: Axis::Row, index: i });
    }
    if let Some(j) = (0..m.ncols()).find(|&j| m.column(j).iter().all(|&v| v == 0.0)) {
        return Err(Error::DirtyData { axis: Axis::Column, index: j });
    }
    Ok(())
}

pub fn norm2(v: &[f64]) -> f64 {
    // Scaled accumulation keeps tiny residual norms from underflowing.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(s)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns `v / ‖v‖₂`.
pub fn normalize(v: &[f64]) -> Result<UnitVector> {
    let n = norm2(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(UnitVector(v.iter().map(|x| x / n).collect()))
}

/// Cosine of the angle between two nonzero vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: (a.len(), 1), found: (b.len(), 1) });
    }
    let na = norm2(a);
    let nb = norm2(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c: f64 = a.iter().zip(b).map(|(x, y)| (x / na) * (y / nb)).sum();
    Ok(c.clamp(-1.0, 1.0))
}

/// Normalized arithmetic mean of the columns of `points`.
pub fn mean_direction(points: &DMatrix<f64>) -> Result<UnitVector> {
    if points.ncols() == 0 || points.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = points.ncols() as f64;
    let mean: Vec<f64> = (0..points.nrows()).map(|i| points.row(i).iter().sum::<f64>() / n).collect();
    normalize(&mean)
}

/// `‖xᵢ − U hᵢ‖₂ / ‖xᵢ‖₂` for every column `i` of `x`.
///
/// `u` holds the rays as columns. A zero data column yields `ZeroVector`.
pub fn relative_residual_norms(x: &DMatrix<f64>, u: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Vec<f64>> {
    if u.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch { expected: (x.nrows(), u.ncols()), found: (u.nrows(), u.ncols()) });
    }
    if h.nrows() != u.ncols() || h.ncols() != x.ncols() {
        return Err(Error::DimensionMismatch { expected: (u.ncols(), x.ncols()), found: (h.nrows(), h.ncols()) });
    }
    let fit = u * h;
    let mut out = Vec::with_capacity(x.ncols());
    let mut r = alloc::vec![0.0; x.nrows()];
    for j in 0..x.ncols() {
        let xn = norm2(x.column(j).as_slice());
        if xn == 0.0 {
            return Err(Error::ZeroVector);
        }
        for i in 0..x.nrows() {
            r[i] = x[(i, j)] - fit[(i, j)];
        }
        out.push(norm2(&r) / xn);
    }
    Ok(out)
}

/// `‖A‖_F`.
pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    norm2(m.as_slice())
}

/// `‖MᵀM − I‖_F` for the columns of `m`.
pub fn column_orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let mut acc = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = g[(i, j)] - target;
            acc += d * d;
        }
    }
    libm::sqrt(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalize_examples() {
        let u = normalize(&[3.0, 4.0]).unwrap();
        assert!(close(u[0], 0.6, 1e-15) && close(u[1], 0.8, 1e-15));
        assert_eq!(normalize(&[1.0, 0.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        // 1/√5 and 2/√5
        let u = normalize(&[2.0, 4.0]).unwrap();
        assert!(close(u[0], 0.447_213_595_499_958, 1e-12));
        assert!(close(u[1], 0.894_427_190_999_916, 1e-12));
        assert_eq!(normalize(&[0.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(close(cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), core::f64::consts::FRAC_1_SQRT_2, 1e-12));
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn mean_direction_examples() {
        let m = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let u = mean_direction(&m).unwrap();
        assert!(close(u[0], core::f64::consts::FRAC_1_SQRT_2, 1e-12));
        let m = DMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        assert_eq!(mean_direction(&m).unwrap().as_slice(), &[1.0, 0.0]);
        let m = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let u = mean_direction(&m).unwrap();
        assert!(close(u[0], 0.894_427_190_999_916, 1e-12));
        assert!(close(u[1], 0.447_213_595_499_958, 1e-12));
    }

    #[test]
    fn residual_examples() {
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let h = DMatrix::from_column_slice(1, 1, &[1.0]);
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let r = relative_residual_norms(&x, &u, &h).unwrap();
        assert!(close(r[0], core::f64::consts::FRAC_1_SQRT_2, 1e-12));

        let x = DMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        let h = DMatrix::from_column_slice(1, 1, &[2.0]);
        assert_eq!(relative_residual_norms(&x, &u, &h).unwrap(), vec![0.0]);

        let bad = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(relative_residual_norms(&x, &u, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dataset_rejects_dirty_input() {
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(DataSet::new(m, None), Err(Error::DirtyData { axis: Axis::Row, index: 1 }));
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, -1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(DataSet::new(m, None), Err(Error::NegativeEntry { .. })));
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(DataSet::new(m, None), Err(Error::DirtyData { axis: Axis::Column, index: 1 }));
    }

    #[test]
    fn dense_matrix_rejects_non_finite() {
        assert_eq!(DenseMatrix::from_row_major(1, 2, &[1.0, f64::NAN]), Err(Error::NonFinite { row: 0, col: 1 }));
        assert_eq!(DenseMatrix::from_row_major(0, 0, &[]), Err(Error::EmptyMatrix));
    }
}
