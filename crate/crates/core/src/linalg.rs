//! Small dense matrices over a generic [`Real`] scalar.
//!
//! Chart dimensions are tiny (n <= 8), so everything here is direct:
//! partial-pivot LU for determinants and inverses, Cholesky, and a cyclic
//! Jacobi sweep for symmetric eigenproblems.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        crate::real::max_abs(&self.data)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * half)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// `AᵀXA` for square `X`.
    pub fn congruence(&self, x: &Matrix<T>) -> Matrix<T> {
        &(&self.transpose() * x) * self
    }

    /// LU with partial pivoting; returns packed factors, permutation and sign.
    fn lu(&self) -> Option<(Matrix<T>, Vec<usize>, T)> {
        assert!(self.is_square(), "LU of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())
                .unwrap();
            if a[(p, k)] == T::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                a[(i, k)] = f;
                for j in k + 1..n {
                    let v = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * v;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> T {
        match self.lu() {
            None => T::zero(),
            Some((lu, _, sign)) => (0..self.rows).fold(sign, |acc, i| acc * lu[(i, i)]),
        }
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.rows;
        let (lu, perm, _) = self
            .lu()
            .ok_or_else(|| Error::Singular(format!("{n}x{n} matrix has a zero pivot")))?;
        let scale = self.max_abs();
        let min_pivot = (0..n).fold(T::infinity(), |m, i| m.min(lu[(i, i)].abs()));
        if min_pivot <= scale * T::epsilon() * T::lit(n as f64) {
            return Err(Error::Singular(format!(
                "pivot {min_pivot} negligible against scale {scale}"
            )));
        }
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            let mut x: Vec<T> = (0..n)
                .map(|i| if perm[i] == col { T::one() } else { T::zero() })
                .collect();
            for i in 0..n {
                for k in 0..i {
                    x[i] = x[i] - lu[(i, k)] * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    x[i] = x[i] - lu[(i, k)] * x[k];
                }
                x[i] = x[i] / lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Ok(inv)
    }

    /// Lower-triangular `L` with `A = LLᵀ`.
    pub fn cholesky(&self) -> Result<Matrix<T>> {
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite(format!(
                    "Cholesky pivot {j} is {d}"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Matrix<T> {
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            for i in col..n {
                let mut s = if i == col { T::one() } else { T::zero() };
                for k in col..i {
                    s = s - self[(i, k)] * inv[(k, col)];
                }
                inv[(i, col)] = s / self[(i, i)];
            }
        }
        inv
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues ascending and the matching orthonormal eigenvectors
    /// as columns.
    pub fn symmetric_eigen(&self) -> (Vec<T>, Matrix<T>) {
        assert!(self.is_square(), "eigen of non-square matrix");
        let n = self.rows;
        let mut a = self.symmetrized();
        let mut v = Matrix::identity(n);
        let two = T::lit(2.0);
        for _sweep in 0..100 {
            let off = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(T::zero(), |s, (i, j)| s + a[(i, j)] * a[(i, j)]);
            if off <= T::min_positive_value() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = (t * t + T::one()).sqrt().recip();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        (values, vectors)
    }

    /// Eigenvalues of a general matrix whose spectrum is known to be real,
    /// via the symmetric part of a similar symmetric matrix. Used for
    /// `σ⁻¹σ̄` with positive-definite `σ`: returns ascending eigenvalues of
    /// `L⁻¹ σ̄ L⁻ᵀ` where `σ = LLᵀ`.
    pub fn generalized_symmetric_eigenvalues(sigma: &Matrix<T>, other: &Matrix<T>) -> Result<Vec<T>> {
        let l = sigma.cholesky()?;
        let li = l.lower_inverse();
        Ok((&(&li * other) * &li.transpose()).symmetric_eigen().0)
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |s, k| s + self[(i, k)] * rhs[(k, j)])
        })
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        assert!((a.det() - 18.0).abs() < 1e-12);
        let prod = &a * &a.inverse().unwrap();
        assert!((&prod - &Matrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn permutation_det_sign() {
        let p = m(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(p.det(), -1.0);
    }

    #[test]
    fn singular_inverse_errors() {
        assert!(matches!(m(&[&[1.0, 2.0], &[2.0, 4.0]]).inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(m(&[&[1.0, 0.0], &[0.0, -1.0]]).cholesky().is_err());
        let l = m(&[&[4.0, 2.0], &[2.0, 3.0]]).cholesky().unwrap();
        assert!((&(&l * &l.transpose()) - &m(&[&[4.0, 2.0], &[2.0, 3.0]])).max_abs() < 1e-15);
    }

    #[test]
    fn jacobi_known_spectrum() {
        let (vals, vecs) = m(&[&[2.0, 1.0], &[1.0, 2.0]]).symmetric_eigen();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let vtv = &vecs.transpose() * &vecs;
        assert!((&vtv - &Matrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn single_precision_inverse() {
        let a: Matrix<f32> = Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let prod = &a * &a.inverse().unwrap();
        assert!((&prod - &Matrix::identity(2)).max_abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn eigen_reconstructs(entries in prop::collection::vec(-5.0..5.0f64, 10)) {
            let a = Matrix::from_fn(4, 4, |i, j| {
                let (r, c) = if i <= j { (i, j) } else { (j, i) };
                entries[r * 4 + c - r * (r + 1) / 2]
            });
            let (vals, vecs) = a.symmetric_eigen();
            let rebuilt = &(&vecs * &Matrix::diag(&vals)) * &vecs.transpose();
            prop_assert!((&rebuilt - &a).max_abs() < 1e-11);
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
