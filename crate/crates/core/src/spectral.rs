//! Characteristic-polynomial invariants of the Lax matrix and action extraction.
//!
//! Convention: `det(L - x I) = sum_m K_m x^{2n-m}`, hence `K_m = (-1)^m e_m(spec L)`
//! and `K_0 = 1`.

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex;
use serde::Serialize;

use crate::cmatrix::CMatrix;
use crate::domain::ActionVector;
use crate::equivalence::{InvariantKind, InvariantVector};
use crate::error::{Error, Result};
use crate::lax::LaxMatrix;
use crate::scalar::Field;

/// Multiplicative pairing tolerance `|l * l' - 1|` for reciprocal eigenvalues.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
/// Smallest action treated as nondegenerate.
pub const DEGENERATE_ACTION: f64 = 1e-8;

const HERMITIAN_TOLERANCE: f64 = 1e-8;
const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// `(K_0, ..., K_{2n})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPolyCoeffs {
    k: Vec<f64>,
}

impl CharPolyCoeffs {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        if k.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "expected 2n+1 coefficients, got {}",
                k.len()
            )));
        }
        Ok(CharPolyCoeffs { k })
    }

    pub fn n(&self) -> usize {
        (self.k.len() - 1) / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }

    pub fn get(&self, m: usize) -> f64 {
        self.k[m]
    }

    /// `max_m |K_{2n-m} - K_m| / (1 + |K_m|)`.
    pub fn palindrome_residual(&self) -> f64 {
        let len = self.k.len();
        (0..=self.n())
            .map(|m| (self.k[len - 1 - m] - self.k[m]).abs() / (1.0 + self.k[m].abs()))
            .fold(0.0, f64::max)
    }

    /// `(K_0, ..., K_n)`, the independent half.
    pub fn lower_half(&self) -> InvariantVector {
        let n = self.n();
        InvariantVector::new(InvariantKind::LaxSpectral, self.k[..=n].to_vec(), n)
            .expect("K_0 is 1 by construction")
    }
}

/// Coefficients of `prod_i (x - r_i)` in decreasing powers of `x`, built by
/// multiplying in one monic linear factor at a time.
pub fn coeffs_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = Vec::with_capacity(roots.len() + 1);
    c.push(1.0);
    for &r in roots {
        c.push(0.0);
        for m in (1..c.len()).rev() {
            c[m] -= r * c[m - 1];
        }
    }
    c
}

fn check_hermitian(m: &CMatrix<f64>) -> Result<()> {
    let residual = m.hermiticity_residual();
    if residual > HERMITIAN_TOLERANCE * (1.0 + m.max_abs()) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (residual {residual:e})"
        )));
    }
    Ok(())
}

/// Real spectrum of `L` in decreasing order.
pub fn spectrum(lax: &LaxMatrix) -> Result<Vec<f64>> {
    let m = lax.matrix();
    check_hermitian(m)?;
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigensolverFailure("Hermitian eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `K_m` from the eigenvalues of `L`.
pub fn char_poly_eigen(lax: &LaxMatrix) -> Result<CharPolyCoeffs> {
    let eigs = spectrum(lax)?;
    CharPolyCoeffs::new(coeffs_from_roots(&eigs))
}

/// Faddeev-LeVerrier recursion over any scalar: `c_0 = 1`,
/// `M_k = L M_{k-1} + c_{k-1} I`, `c_k = -tr(L M_k) / k`.
///
/// Returns `c_0..c_N` with `det(x I - L) = sum_k c_k x^{N-k}`.
pub fn leverrier_generic<S: Field>(l: &CMatrix<S>) -> Vec<Complex<S>> {
    let size = l.rows();
    let mut coeffs = Vec::with_capacity(size + 1);
    coeffs.push(Complex::new(S::one(), S::zero()));
    let mut m = CMatrix::<S>::zeros(size, size);
    for k in 1..=size {
        let mut next = l.matmul(&m);
        next.add_diagonal(coeffs[k - 1]);
        m = next;
        let c = -l.matmul(&m).trace() / Complex::new(S::from_f64(k as f64), S::zero());
        coeffs.push(c);
    }
    coeffs
}

/// [`leverrier_generic`] carried out in the extended-precision counterpart of `S`.
///
/// The power traces are dominated by the largest eigenvalues, so in plain
/// `f64` the recursion loses roughly `log10(l_max / l_min)` digits per step;
/// the extra precision absorbs that loss for the spectra met in practice.
pub fn leverrier_extended<S: Field>(l: &CMatrix<S>) -> Vec<Complex<S>> {
    leverrier_generic(&l.convert(S::extend))
        .into_iter()
        .map(|c| Complex::new(S::from_extended(c.re), S::from_extended(c.im)))
        .collect()
}

/// `K_m` by the trace recursion; an independent route to [`char_poly_eigen`].
pub fn char_poly_leverrier(lax: &LaxMatrix) -> Result<CharPolyCoeffs> {
    let coeffs = leverrier_extended(lax.matrix());
    let mut k = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Domain("overflow in trace recursion".into()));
        }
        if c.im.abs() > IMAGINARY_TOLERANCE * (1.0 + c.re.abs()) {
            return Err(Error::ImaginaryResidual {
                real: c.re,
                imag: c.im,
            });
        }
        k.push(c.re);
    }
    CharPolyCoeffs::new(k)
}

/// Pairs a decreasing positive spectrum as `(l, 1/l)` and returns the logs of
/// the larger members.
pub fn actions_from_spectrum(eigs: &[f64]) -> Result<ActionVector> {
    if eigs.is_empty() || !eigs.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "spectrum must have even positive length, got {}",
            eigs.len()
        )));
    }
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if let Some(&bad) = sorted.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::PositivityViolation { eigenvalue: bad });
    }
    let size = sorted.len();
    let n = size / 2;
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let (large, small) = (sorted[i], sorted[size - 1 - i]);
        let product = large * small;
        if !((product - 1.0).abs() <= PAIRING_TOLERANCE) {
            return Err(Error::PairingFailure {
                large,
                small,
                product,
            });
        }
        q.push(large.ln());
    }
    let last = q[n - 1];
    if last < DEGENERATE_ACTION {
        return Err(Error::DegenerateAction { q: last });
    }
    if q.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::DegenerateAction {
            q: q.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min),
        });
    }
    ActionVector::new(q)
}

/// Action variables `q` from the spectrum of `L`.
pub fn extract_actions(lax: &LaxMatrix) -> Result<ActionVector> {
    actions_from_spectrum(&spectrum(lax)?)
}
