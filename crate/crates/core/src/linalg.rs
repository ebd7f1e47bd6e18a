//! Small dense linear algebra.
//!
//! Matrices here are at most a few dozen entries (2×2 states, up to three
//! stacked landmark rows), so everything is row-major `Vec<f64>` storage
//! with straightforward O(n³) kernels. The arithmetic operators on
//! references panic on shape mismatch; fallible operations (inverse,
//! Cholesky, covariance validation) return [`Error`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

/// Condition estimate above which [`Matrix::inverse`] refuses to invert.
pub const MAX_CONDITION: f64 = 1e14;

/// Relative tolerance for symmetry and PSD checks on covariances.
pub const COV_TOL: f64 = 1e-9;

/// Dense column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

/// State `x_t`.
pub type StateVec = Vector;
/// Control `u_t`.
pub type ControlVec = Vector;
/// Observation `z_t`.
pub type ObsVec = Vector;

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_slice(entries: &[f64]) -> Self {
        Vector(entries.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector add: length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector sub: length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "from_row_slice: wrong data length");
        Matrix {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix {
            rows: rows.len(),
            cols: C,
            data,
        }
    }

    /// Single-row matrix.
    pub fn row_vector(entries: &[f64]) -> Self {
        Matrix::from_row_slice(1, entries.len(), entries)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dim(
                "matrix multiply",
                format!("{} rows", self.cols),
                format!("{} rows", rhs.rows),
            ));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "mul_vec: dimension mismatch");
        Vector::new(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> Matrix {
        assert!(self.is_square(), "symmetrize of non-square matrix");
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Max absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let tol = rel_tol * self.max_abs().max(1.0);
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> f64 {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if a[p * n + k] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }

    /// Gauss–Jordan inverse with partial pivoting.
    ///
    /// Fails with [`Error::Singular`] when a pivot vanishes or the 1-norm
    /// condition estimate exceeds [`MAX_CONDITION`].
    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dim(
                "inverse",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n).data;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if a[p * n + k] == 0.0 {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                    inv.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            for j in 0..n {
                a[k * n + j] /= pivot;
                inv[k * n + j] /= pivot;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i * n + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] -= f * a[k * n + j];
                    inv[i * n + j] -= f * inv[k * n + j];
                }
            }
        }
        let inv = Matrix {
            rows: n,
            cols: n,
            data: inv,
        };
        let condition = self.norm_1() * inv.norm_1();
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::Singular { condition });
        }
        Ok(inv)
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dim(
                "cholesky",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = libm::sqrt(d);
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }

    /// Solves `self · X = rhs` for symmetric positive definite `self`.
    pub fn solve_spd(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows != self.rows {
            return Err(Error::dim("solve_spd", self.rows, rhs.rows));
        }
        let l = self.cholesky()?;
        let n = self.rows;
        let mut x = rhs.clone();
        for c in 0..rhs.cols {
            // forward: L y = b
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
            // backward: Lᵀ x = y
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
        }
        Ok(x)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Only the upper triangle is read. Eigenvalues are returned in
    /// ascending order, with eigenvectors as the matching columns.
    pub fn symmetric_eigen(&self) -> SymmetricEigen {
        assert!(self.is_square(), "symmetric_eigen of non-square matrix");
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut v = Matrix::identity(n);
        let scale = a.max_abs();
        if scale > 0.0 {
            for _sweep in 0..100 {
                let off: f64 = (0..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .map(|(i, j)| a[(i, j)] * a[(i, j)])
                    .sum();
                if off <= (f64::EPSILON * scale) * (f64::EPSILON * scale) {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        let apq = a[(p, q)];
                        if apq == 0.0 {
                            continue;
                        }
                        let app = a[(p, p)];
                        let aqq = a[(q, q)];
                        let theta = (aqq - app) / (2.0 * apq);
                        let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                        let t = if theta == 0.0 { 1.0 } else { t };
                        let c = 1.0 / libm::sqrt(t * t + 1.0);
                        let s = t * c;
                        for k in 0..n {
                            let akp = a[(k, p)];
                            let akq = a[(k, q)];
                            a[(k, p)] = c * akp - s * akq;
                            a[(k, q)] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a[(p, k)];
                            let aqk = a[(q, k)];
                            a[(p, k)] = c * apk - s * aqk;
                            a[(q, k)] = s * apk + c * aqk;
                        }
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        for k in 0..n {
                            let vkp = v[(k, p)];
                            let vkq = v[(k, q)];
                            v[(k, p)] = c * vkp - s * vkq;
                            v[(k, q)] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
        let mut vectors = Matrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                vectors[(k, col)] = v[(k, src)];
            }
        }
        SymmetricEigen { values, vectors }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        match self.try_mul(rhs) {
            Ok(m) => m,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix add: shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sub: shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Output of [`Matrix::symmetric_eigen`].
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let d = Matrix::from_diagonal(&self.values);
        &(&self.vectors * &d) * &self.vectors.transpose()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Symmetric positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(Matrix);

impl CovMatrix {
    /// Validates symmetry and positive semidefiniteness within [`COV_TOL`].
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidCovariance(format!(
                "not square ({}x{})",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        if !m.is_symmetric(COV_TOL) {
            return Err(Error::InvalidCovariance("not symmetric".into()));
        }
        let eig = m.symmetric_eigen();
        if eig.min() < -COV_TOL * eig.max().max(1.0) {
            return Err(Error::InvalidCovariance(format!(
                "not positive semidefinite (min eigenvalue {:e})",
                eig.min()
            )));
        }
        Ok(CovMatrix(m))
    }

    /// Symmetrizes `m` and wraps it without the eigenvalue check.
    ///
    /// For outputs of covariance recursions whose inputs were already
    /// validated.
    pub fn from_symmetrized(m: &Matrix) -> Self {
        CovMatrix(m.symmetrize())
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        CovMatrix::new(Matrix::from_diagonal(diag))
    }

    /// `s · I_n`.
    pub fn isotropic(n: usize, s: f64) -> Result<Self> {
        CovMatrix::new(Matrix::identity(n).scale(s))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl AsRef<Matrix> for CovMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}
