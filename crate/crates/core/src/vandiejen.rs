//! Van Diejen's commuting Hamiltonians `H_l` in the rational case, and the
//! main Hamiltonian `H`.
//!
//! The kernels are
//!
//! ```text
//! v(x) = (x + i mu) / x,     w(x) = (x + i nu)(x + i kappa) / x^2,
//! ```
//!
//! and `H_l` is a sum over signed subsets `(J, eps)` with `|J| <= l` of
//! `cosh(theta_{eps J}) * sqrt(V_{eps J; J^c} V_{-eps J; J^c}) * U_{J^c, l-|J|}`.
//!
//! The square-root factor is evaluated from paired real products
//! `v(x)v(-x) = 1 + mu^2/x^2` and `w(x)w(-x) = (1 + nu^2/x^2)(1 + kappa^2/x^2)`,
//! so it never touches a branch cut. `U_{K,p}` is summed in complex arithmetic
//! and its imaginary part is checked to vanish.
//!
//! Cost of the full family is `sum_{|J| <= n} 3^{n-|J|} = 5^n` terms of
//! `O(n^2)` factors each, so this path is capped at [`MAX_DIRECT_N`].

use itertools::Itertools;
use num_complex::Complex;

use crate::domain::{check_no_collisions, enumerate_signed_subsets, Params, PhasePoint, SignedSubset};
use crate::equivalence::{InvariantKind, InvariantVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `n` accepted by the direct (subset enumeration) family evaluation.
pub const MAX_DIRECT_N: usize = 10;

/// Relative tolerance on the imaginary part of `U_{K,p}`.
pub const U_IMAGINARY_TOLERANCE: f64 = 1e-8;

#[inline]
fn v<S: Real>(x: S, mu: f64) -> Complex<S> {
    Complex::new(S::one(), S::from_f64(mu) / x)
}

#[inline]
fn w<S: Real>(x: S, params: &Params) -> Complex<S> {
    Complex::new(S::one(), S::from_f64(params.nu()) / x)
        * Complex::new(S::one(), S::from_f64(params.kappa()) / x)
}

/// `v(x) v(-x)`.
#[inline]
fn v_paired<S: Real>(x: S, mu: f64) -> S {
    S::one() + S::from_f64(mu * mu) / (x * x)
}

/// `w(x) w(-x)`.
#[inline]
fn w_paired<S: Real>(x: S, params: &Params) -> S {
    let x2 = x * x;
    (S::one() + S::from_f64(params.nu() * params.nu()) / x2)
        * (S::one() + S::from_f64(params.kappa() * params.kappa()) / x2)
}

/// Main Hamiltonian `H(lambda, theta)`.
pub fn main_hamiltonian(point: &PhasePoint, params: &Params) -> f64 {
    main_hamiltonian_generic(point.lambda(), point.theta(), params)
}

/// [`main_hamiltonian`] over any scalar. Coordinates are not validated.
pub fn main_hamiltonian_generic<S: Real>(lambda: &[S], theta: &[S], params: &Params) -> S {
    let n = lambda.len();
    let mu = params.mu();
    let mut kinetic = S::zero();
    for j in 0..n {
        let mut radicand = w_paired(lambda[j], params);
        for k in (0..n).filter(|&k| k != j) {
            radicand *= v_paired(lambda[j] - lambda[k], mu) * v_paired(lambda[j] + lambda[k], mu);
        }
        kinetic += theta[j].cosh() * radicand.sqrt();
    }
    let coupling = params.nu() * params.kappa() / (mu * mu);
    if coupling == 0.0 {
        return kinetic;
    }
    let product = lambda
        .iter()
        .fold(S::one(), |acc, &x| acc * v_paired(x, mu));
    kinetic + S::from_f64(coupling) * (product - S::one())
}

/// `U_{K,p}` as a complex number, before the realness check.
pub fn u_complex<S: Real>(k_set: &[usize], p: usize, lambda: &[S], params: &Params) -> Complex<S> {
    let mu = params.mu();
    let mut total = Complex::new(S::zero(), S::zero());
    let mut x = Vec::with_capacity(p);
    for subset in k_set.iter().copied().combinations(p) {
        let rest: Vec<usize> = k_set
            .iter()
            .copied()
            .filter(|k| !subset.contains(k))
            .collect();
        for mask in 0u64..(1u64 << p) {
            x.clear();
            x.extend(subset.iter().enumerate().map(|(pos, &i)| {
                if mask >> pos & 1 == 0 {
                    lambda[i]
                } else {
                    -lambda[i]
                }
            }));
            let mut term = Complex::new(S::one(), S::zero());
            for (a, &xa) in x.iter().enumerate() {
                term = term * w(xa, params);
                for &xb in &x[a + 1..] {
                    term = term * v(xa + xb, mu) * v(-xa - xb, mu);
                }
                for &k in &rest {
                    term = term * v(xa + lambda[k], mu) * v(xa - lambda[k], mu);
                }
            }
            total = total + term;
        }
    }
    if p % 2 == 1 {
        -total
    } else {
        total
    }
}

fn real_part_checked<S: Real>(z: Complex<S>) -> Result<S> {
    let (re, im) = (z.re.value(), z.im.value());
    if im.abs() > U_IMAGINARY_TOLERANCE * (1.0 + re.abs()) {
        return Err(Error::ImaginaryResidual { real: re, imag: im });
    }
    Ok(z.re)
}

fn check_index_set(k_set: &[usize], n: usize) -> Result<()> {
    if k_set.windows(2).any(|w| w[0] >= w[1]) || k_set.iter().any(|&k| k >= n) {
        return Err(Error::InvalidArgument(format!(
            "index set {k_set:?} is not a strictly increasing subset of 0..{n}"
        )));
    }
    Ok(())
}

/// `U_{K,p}` at the positions `lambda`; `K` holds zero-based indices.
pub fn eval_u(k_set: &[usize], p: usize, lambda: &[f64], params: &Params) -> Result<f64> {
    check_index_set(k_set, lambda.len())?;
    if p > k_set.len() {
        return Err(Error::InvalidArgument(format!(
            "p = {p} exceeds |K| = {}",
            k_set.len()
        )));
    }
    check_no_collisions(lambda)?;
    real_part_checked(u_complex(k_set, p, lambda, params))
}

/// `V_{eps J; K} V_{-eps J; K}` from paired real factors.
pub fn v_pair_generic<S: Real>(subset: &SignedSubset, k_set: &[usize], lambda: &[S], params: &Params) -> S {
    let mu = params.mu();
    let x: Vec<S> = subset.iter().map(|(j, s)| s.apply(lambda[j])).collect();
    let mut prod = S::one();
    for (a, &xa) in x.iter().enumerate() {
        prod *= w_paired(xa, params);
        for &xb in &x[a + 1..] {
            let f = v_paired(xa + xb, mu);
            prod *= f * f;
        }
        for &k in k_set {
            prod *= v_paired(xa + lambda[k], mu) * v_paired(xa - lambda[k], mu);
        }
    }
    prod
}

/// `V_{eps J; K} V_{-eps J; K}`; requires `J` and `K` disjoint.
pub fn eval_v_pair(subset: &SignedSubset, k_set: &[usize], lambda: &[f64], params: &Params) -> Result<f64> {
    let n = lambda.len();
    check_index_set(k_set, n)?;
    if subset.indices().iter().any(|j| *j >= n) {
        return Err(Error::InvalidArgument(format!(
            "subset {:?} out of range for n = {n}",
            subset.indices()
        )));
    }
    if subset.indices().iter().any(|j| k_set.contains(j)) {
        return Err(Error::InvalidArgument("J and K must be disjoint".into()));
    }
    check_no_collisions(lambda)?;
    Ok(v_pair_generic(subset, k_set, lambda, params))
}

/// `H_l` over any scalar; collisions are rejected, chamber order is not required.
pub fn hamiltonian_generic<S: Real>(l: usize, lambda: &[S], theta: &[S], params: &Params) -> Result<S> {
    let n = lambda.len();
    if theta.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: theta.len(),
        });
    }
    if l > n {
        return Err(Error::InvalidArgument(format!("level l = {l} exceeds n = {n}")));
    }
    if l == 0 {
        return Ok(S::one());
    }
    check_no_collisions(lambda)?;
    let mut total = S::zero();
    for subset in enumerate_signed_subsets(n, l)? {
        let rest = subset.complement(n);
        let u = real_part_checked(u_complex(&rest, l - subset.len(), lambda, params))?;
        let term = if subset.is_empty() {
            u
        } else {
            subset.signed_sum(theta).cosh() * v_pair_generic(&subset, &rest, lambda, params).sqrt() * u
        };
        total += term;
    }
    Ok(total)
}

/// Van Diejen's `H_l(lambda, theta)`, `0 <= l <= n`.
pub fn eval_h_l(l: usize, point: &PhasePoint, params: &Params) -> Result<f64> {
    hamiltonian_generic(l, point.lambda(), point.theta(), params)
}

/// `(H_0, ..., H_n)`.
pub fn eval_all_h(point: &PhasePoint, params: &Params) -> Result<InvariantVector> {
    let n = point.n();
    if n > MAX_DIRECT_N {
        return Err(Error::InvalidArgument(format!(
            "direct evaluation is capped at n = {MAX_DIRECT_N} (got {n}); use the spectral route"
        )));
    }
    let values = (0..=n)
        .map(|l| eval_h_l(l, point, params))
        .collect::<Result<Vec<_>>>()?;
    InvariantVector::new(InvariantKind::VanDiejen, values, n)
}
