//! The `2n x 2n` Hermitian Lax matrix `L = h^{-1} A h^{-1}` and its factors.
//!
//! Block layout (each block `n x n`, diagonal blocks are diagonal matrices):
//!
//! ```text
//! C = [[0, 1], [1, 0]]        h = [[a(lambda), b(lambda)], [-b(lambda), a(lambda)]]
//! a(x) = sqrt(x + sqrt(x^2 + kappa^2)) / sqrt(2x)
//! b(x) = i kappa / (sqrt(2x) sqrt(x + sqrt(x^2 + kappa^2)))
//! A_jk = (i mu F_j conj(F_k) + i (mu - 2 nu) C_jk) / (i mu + Lambda_j - Lambda_k)
//! ```
//!
//! with `Lambda = diag(lambda, -lambda)`. The inverse of `h` is never formed by
//! a solve: `h^{-1} = C h C`.

use num_complex::{Complex, Complex64};
use serde::Serialize;

use crate::cmatrix::CMatrix;
use crate::domain::{check_no_collisions, Params, PhasePoint};
use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

/// Absolute bound on the structural residuals at moderate `|L|`.
pub const STRUCTURE_TOLERANCE: f64 = 1e-10;

/// All ingredients of the Lax matrix at one phase point.
#[derive(Debug, Clone)]
pub struct LaxFactors<S = f64> {
    pub c: CMatrix<S>,
    pub h: CMatrix<S>,
    pub z: Vec<Complex<S>>,
    pub f: Vec<Complex<S>>,
    /// `diag(lambda, -lambda)` as a vector.
    pub lambda_diag: Vec<S>,
    pub a: CMatrix<S>,
}

impl<S: Real> LaxFactors<S> {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `h^{-1}` via `C h C`.
    pub fn h_inverse(&self) -> CMatrix<S> {
        self.h.swap_halves_conjugation()
    }
}

/// The Lax matrix together with the system size.
#[derive(Debug, Clone)]
pub struct LaxMatrix<S = f64> {
    matrix: CMatrix<S>,
    n: usize,
}

impl<S: Real> LaxMatrix<S> {
    pub fn matrix(&self) -> &CMatrix<S> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl LaxMatrix<f64> {
    /// Wraps an arbitrary `2n x 2n` matrix, e.g. `diag(e^{-q}, e^{q})`.
    pub fn from_matrix(matrix: CMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows().is_multiple_of(2) || matrix.rows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "Lax matrix must be 2n x 2n, got {} x {}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let n = matrix.rows() / 2;
        Ok(LaxMatrix { matrix, n })
    }

    /// `diag(e^{-q}, e^{q})`, the asymptotic form of `L`.
    pub fn asymptotic(q: &[f64]) -> Result<Self> {
        let n = q.len();
        let diag: Vec<f64> = q.iter().map(|x| (-x).exp()).chain(q.iter().map(|x| x.exp())).collect();
        Self::from_matrix(CMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Adds `delta` to the `(0, 0)` entry. Keeps `L` Hermitian; used for fault injection.
    pub fn perturbed(&self, delta: f64) -> LaxMatrix<f64> {
        let mut m = self.matrix.clone();
        m[(0, 0)] += Complex64::new(delta, 0.0);
        LaxMatrix { matrix: m, n: self.n }
    }
}

/// `a(x)` for `x > 0`.
pub fn a_fn<S: Real>(x: S, kappa: f64) -> S {
    let k = S::from_f64(kappa);
    let inner = x + (x * x + k * k).sqrt();
    inner.sqrt() / (S::from_f64(2.0) * x).sqrt()
}

/// Imaginary part of `b(x)` for `x > 0` (the real part is zero).
pub fn b_fn_imag<S: Real>(x: S, kappa: f64) -> S {
    let k = S::from_f64(kappa);
    let inner = x + (x * x + k * k).sqrt();
    k / ((S::from_f64(2.0) * x).sqrt() * inner.sqrt())
}

fn involution<S: Real>(n: usize) -> CMatrix<S> {
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if (i + n) % (2 * n) == j {
            Complex::new(S::one(), S::zero())
        } else {
            Complex::new(S::zero(), S::zero())
        }
    })
}

/// `z_l(lambda)`.
pub fn z_vector<S: Real>(lambda: &[S], params: &Params) -> Vec<Complex<S>> {
    let n = lambda.len();
    let mu = S::from_f64(params.mu());
    let nu = S::from_f64(params.nu());
    (0..n)
        .map(|l| {
            let mut z = -Complex::new(S::one(), nu / lambda[l]);
            for m in (0..n).filter(|&m| m != l) {
                z = z
                    * Complex::new(S::one(), mu / (lambda[l] - lambda[m]))
                    * Complex::new(S::one(), mu / (lambda[l] + lambda[m]));
            }
            z
        })
        .collect()
}

/// Lax factors over any scalar; assumes positive, collision-free positions.
pub fn build_factors_generic<S: Real>(lambda: &[S], theta: &[S], params: &Params) -> LaxFactors<S> {
    let n = lambda.len();
    let zero = S::zero();
    let c = involution(n);

    let a_diag: Vec<S> = lambda.iter().map(|&x| a_fn(x, params.kappa())).collect();
    let b_diag: Vec<S> = lambda.iter().map(|&x| b_fn_imag(x, params.kappa())).collect();
    let h = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i % n, j % n);
        if bi != bj {
            return Complex::new(zero, zero);
        }
        match (i < n, j < n) {
            (true, true) | (false, false) => Complex::new(a_diag[bi], zero),
            (true, false) => Complex::new(zero, b_diag[bi]),
            (false, true) => Complex::new(zero, -b_diag[bi]),
        }
    });

    let z = z_vector(lambda, params);
    let mut f = vec![Complex::new(zero, zero); 2 * n];
    for l in 0..n {
        let fl = (-theta[l] / S::from_f64(2.0)).exp() * modulus(z[l]).sqrt();
        f[l] = Complex::new(fl, zero);
        f[n + l] = z[l].conj() / Complex::new(fl, zero);
    }

    let lambda_diag: Vec<S> = lambda.iter().copied().chain(lambda.iter().map(|&x| -x)).collect();
    let mu = S::from_f64(params.mu());
    let shift = S::from_f64(params.mu() - 2.0 * params.nu());
    let a = CMatrix::from_fn(2 * n, 2 * n, |j, k| {
        let i_mu = Complex::new(zero, mu);
        let mut num = i_mu * f[j] * f[k].conj();
        if (j + n) % (2 * n) == k {
            num = num + Complex::new(zero, shift);
        }
        num / Complex::new(lambda_diag[j] - lambda_diag[k], mu)
    });

    LaxFactors {
        c,
        h,
        z,
        f,
        lambda_diag,
        a,
    }
}

/// `L = h^{-1} A h^{-1}` from its factors.
pub fn assemble<S: Real>(factors: &LaxFactors<S>) -> LaxMatrix<S> {
    let h_inv = factors.h_inverse();
    LaxMatrix {
        matrix: h_inv.matmul(&factors.a).matmul(&h_inv),
        n: factors.n(),
    }
}

/// Lax matrix over any scalar (e.g. dual numbers), without residual checks.
pub fn build_lax_generic<S: Real>(lambda: &[S], theta: &[S], params: &Params) -> Result<LaxMatrix<S>> {
    check_no_collisions(lambda)?;
    if let Some(x) = lambda.iter().find(|x| x.value() <= 0.0) {
        return Err(Error::Domain(format!("nonpositive position {}", x.value())));
    }
    Ok(assemble(&build_factors_generic(lambda, theta, params)))
}

pub fn build_factors(point: &PhasePoint, params: &Params) -> LaxFactors {
    build_factors_generic(point.lambda(), point.theta(), params)
}

/// Builds `L` and checks the structural relations
/// (`CLC = L^{-1}`, `det L = 1`, Hermiticity).
///
/// The check is relative to `max(1, |L|_max)^2`, the scale of the products
/// involved; a failure indicates a construction bug rather than bad input.
pub fn build_lax(point: &PhasePoint, params: &Params) -> Result<LaxMatrix> {
    let factors = build_factors(point, params);
    let lax = assemble(&factors);
    let scale = lax.matrix.max_abs().max(1.0).powi(2);
    let tolerance = STRUCTURE_TOLERANCE * scale;
    let r = lax_residuals(&lax);
    for (name, value) in [
        ("CLCL-I", r.clcl),
        ("hermiticity(L)", r.hermiticity),
        ("det(L)-1", r.det),
    ] {
        if !(value <= tolerance) {
            return Err(Error::StructuralResidual {
                name,
                value,
                tolerance,
            });
        }
    }
    Ok(lax)
}

/// Residuals of the relations involving `L` alone.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaxResiduals {
    pub clcl: f64,
    pub hermiticity: f64,
    pub det: f64,
}

pub fn lax_residuals(lax: &LaxMatrix) -> LaxResiduals {
    let l = lax.matrix();
    LaxResiduals {
        clcl: l.swap_halves_conjugation().matmul(l).identity_residual(),
        hermiticity: l.hermiticity_residual(),
        det: (l.determinant() - Complex64::new(1.0, 0.0)).norm(),
    }
}

/// Max-norm residuals of every structural relation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StructuralResiduals {
    pub chch: f64,
    pub caca: f64,
    pub clcl: f64,
    pub hermiticity_h: f64,
    pub hermiticity_a: f64,
    pub hermiticity_l: f64,
    pub det_h: f64,
    pub det_a: f64,
    pub det_l: f64,
}

impl StructuralResiduals {
    pub fn max(&self) -> f64 {
        [
            self.chch,
            self.caca,
            self.clcl,
            self.hermiticity_h,
            self.hermiticity_a,
            self.hermiticity_l,
            self.det_h,
            self.det_a,
            self.det_l,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn structural_residuals(factors: &LaxFactors, lax: &LaxMatrix) -> StructuralResiduals {
    let c = &factors.c;
    let involution_residual = |m: &CMatrix<f64>| c.matmul(m).matmul(c).matmul(m).identity_residual();
    let det_residual = |m: &CMatrix<f64>| (m.determinant() - Complex64::new(1.0, 0.0)).norm();
    let l = lax.matrix();
    StructuralResiduals {
        chch: involution_residual(&factors.h),
        caca: involution_residual(&factors.a),
        clcl: involution_residual(l),
        hermiticity_h: factors.h.hermiticity_residual(),
        hermiticity_a: factors.a.hermiticity_residual(),
        hermiticity_l: l.hermiticity_residual(),
        det_h: det_residual(&factors.h),
        det_a: det_residual(&factors.a),
        det_l: det_residual(l),
    }
}
