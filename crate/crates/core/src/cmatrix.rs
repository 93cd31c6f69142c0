//! Small dense complex matrices over a generic [`Field`] scalar.
//!
//! Only the handful of operations the Lax construction and the trace-based
//! characteristic polynomial need. Numeric linear algebra on `f64` matrices
//! (eigenvalues, determinants) goes through `nalgebra`.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};

use crate::scalar::Field;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<S>>,
}

impl<S: Field> CMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex::new(S::zero(), S::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(S::one(), S::zero())
            } else {
                Complex::new(S::zero(), S::zero())
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<S>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
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

    pub fn matmul(&self, other: &CMatrix<S>) -> CMatrix<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == S::zero() && a.im == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix<S> {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<S> {
        (0..self.rows.min(self.cols)).fold(Complex::new(S::zero(), S::zero()), |acc, i| acc + self[(i, i)])
    }

    /// `self + c I`.
    pub fn add_diagonal(&mut self, c: Complex<S>) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] = self[(i, i)] + c;
        }
    }

    pub fn map(&self, f: impl Fn(Complex<S>) -> Complex<S>) -> CMatrix<S> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Entrywise change of scalar field.
    pub fn convert<T: Field>(&self, f: impl Fn(S) -> T) -> CMatrix<T> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(f(z.re), f(z.im))).collect(),
        }
    }

    /// `P M P` for the block swap `P = [[0, 1], [1, 0]]`, by permutation.
    pub fn swap_halves_conjugation(&self) -> CMatrix<S> {
        let n = self.rows / 2;
        let sigma = |i: usize| if i < n { i + n } else { i - n };
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(sigma(i), sigma(j))])
    }
}

impl<S> Index<(usize, usize)> for CMatrix<S> {
    type Output = Complex<S>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<S> {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for CMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<S> {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix<f64>) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^*|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |M - I|`.
    pub fn identity_residual(&self) -> f64 {
        self.max_abs_diff(&CMatrix::identity(self.rows))
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn determinant(&self) -> Complex64 {
        self.to_nalgebra().determinant()
    }

    /// Row-major `[re, im]` pairs, the JSON dump layout.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_trace_adjoint() {
        let a = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let b = CMatrix::<f64>::identity(2);
        assert_eq!(a.matmul(&b), a);
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.trace(), Complex64::new(3.0, 0.0));
        let aa = a.matmul(&a.adjoint());
        assert!(aa.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn swap_conjugation_matches_product() {
        let n = 3;
        let c = CMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
            if (i + n) % (2 * n) == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let m = CMatrix::from_fn(2 * n, 2 * n, |i, j| Complex64::new((i * 7 + j) as f64, (i as f64) * 0.5 - j as f64));
        let direct = c.matmul(&m).matmul(&c);
        assert_eq!(m.swap_halves_conjugation(), direct);
    }

    #[test]
    fn determinant_of_diagonal() {
        let m = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new((i + 1) as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!((m.determinant() - Complex64::new(6.0, 0.0)).norm() < 1e-14);
    }
}
