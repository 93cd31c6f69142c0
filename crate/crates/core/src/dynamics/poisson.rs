//! Exact gradients (forward-mode dual numbers) and canonical Poisson brackets
//! `{F, G} = sum_k dF/dlambda_k dG/dtheta_k - dF/dtheta_k dG/dlambda_k`.

use serde::Serialize;

use crate::domain::{Params, PhasePoint};
use crate::error::{Error, Result};
use crate::lax::build_lax_generic;
use crate::scalar::{Dual, Real};
use crate::spectral::leverrier_extended;
use crate::vandiejen::{hamiltonian_generic, main_hamiltonian_generic};

/// A smooth function on phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// The main Hamiltonian `H`.
    MainH,
    /// Van Diejen's `H_l`.
    VanDiejen(usize),
    /// Characteristic-polynomial coefficient `K_m` of the Lax matrix.
    LaxCoefficient(usize),
    /// Position `lambda_k`.
    Position(usize),
    /// Momentum `theta_k`.
    Momentum(usize),
}

impl Observable {
    /// Value over any scalar; coordinates are assumed admissible apart from
    /// collisions, which are rejected.
    pub fn evaluate<S: Real>(&self, lambda: &[S], theta: &[S], params: &Params) -> Result<S> {
        let n = lambda.len();
        let index_check = |k: usize, bound: usize| {
            if k > bound {
                Err(Error::InvalidArgument(format!("{self:?} out of range for n = {n}")))
            } else {
                Ok(())
            }
        };
        match *self {
            Observable::MainH => Ok(main_hamiltonian_generic(lambda, theta, params)),
            Observable::VanDiejen(l) => hamiltonian_generic(l, lambda, theta, params),
            Observable::LaxCoefficient(m) => {
                index_check(m, 2 * n)?;
                let lax = build_lax_generic(lambda, theta, params)?;
                Ok(leverrier_extended(lax.matrix())[m].re)
            }
            Observable::Position(k) => {
                index_check(k + 1, n)?;
                Ok(lambda[k])
            }
            Observable::Momentum(k) => {
                index_check(k + 1, n)?;
                Ok(theta[k])
            }
        }
    }

    pub fn value(&self, point: &PhasePoint, params: &Params) -> Result<f64> {
        self.evaluate(point.lambda(), point.theta(), params)
    }
}

/// Value and gradient of an observable at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gradient {
    pub value: f64,
    pub d_lambda: Vec<f64>,
    pub d_theta: Vec<f64>,
}

/// Exact gradient by `2n` forward-mode passes.
pub fn grad_observable(obs: Observable, point: &PhasePoint, params: &Params) -> Result<Gradient> {
    grad_raw(obs, point.lambda(), point.theta(), params)
}

pub(crate) fn grad_raw(obs: Observable, lambda: &[f64], theta: &[f64], params: &Params) -> Result<Gradient> {
    let n = lambda.len();
    let lam: Vec<Dual> = lambda.iter().map(|&x| Dual::constant(x)).collect();
    let th: Vec<Dual> = theta.iter().map(|&x| Dual::constant(x)).collect();
    let mut value = f64::NAN;
    let mut directional = |seed_lambda: bool, k: usize| -> Result<f64> {
        let (mut l, mut t) = (lam.clone(), th.clone());
        if seed_lambda {
            l[k].du = 1.0;
        } else {
            t[k].du = 1.0;
        }
        let d = obs.evaluate(&l, &t, params)?;
        value = d.re;
        Ok(d.du)
    };
    let d_lambda = (0..n).map(|k| directional(true, k)).collect::<Result<Vec<_>>>()?;
    let d_theta = (0..n).map(|k| directional(false, k)).collect::<Result<Vec<_>>>()?;
    if !value.is_finite() || d_lambda.iter().chain(&d_theta).any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite gradient of {obs:?}")));
    }
    Ok(Gradient {
        value,
        d_lambda,
        d_theta,
    })
}

/// `{F, G}` from two gradients.
pub fn bracket_from_gradients(f: &Gradient, g: &Gradient) -> f64 {
    f.d_lambda
        .iter()
        .zip(&g.d_theta)
        .zip(f.d_theta.iter().zip(&g.d_lambda))
        .map(|((fl, gt), (ft, gl))| fl * gt - ft * gl)
        .sum()
}

/// Canonical Poisson bracket `{F, G}` at `point`.
pub fn poisson_bracket(f: Observable, g: Observable, point: &PhasePoint, params: &Params) -> Result<f64> {
    let gf = grad_observable(f, point, params)?;
    let gg = grad_observable(g, point, params)?;
    Ok(bracket_from_gradients(&gf, &gg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_phase_point;

    fn params() -> Params {
        Params::new(0.8, 0.6, 1.1).unwrap()
    }

    #[test]
    fn canonical_coordinates() {
        let p = sample_phase_point(3, 5, 0.4, 1.0).unwrap();
        let pr = params();
        for j in 0..3 {
            for k in 0..3 {
                let b = poisson_bracket(Observable::Position(j), Observable::Momentum(k), &p, &pr).unwrap();
                assert_eq!(b, if j == k { 1.0 } else { 0.0 });
                let b = poisson_bracket(Observable::Position(j), Observable::Position(k), &p, &pr).unwrap();
                assert_eq!(b, 0.0);
            }
        }
    }

    #[test]
    fn main_h_matches_first_family_member() {
        let p = sample_phase_point(2, 8, 0.4, 1.0).unwrap();
        let pr = params();
        let h = grad_observable(Observable::MainH, &p, &pr).unwrap();
        let h1 = grad_observable(Observable::VanDiejen(1), &p, &pr).unwrap();
        for (a, b) in h.d_lambda.iter().chain(&h.d_theta).zip(h1.d_lambda.iter().chain(&h1.d_theta)) {
            assert!((2.0 * a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn momentum_derivative_of_single_particle() {
        // n = 1: H = cosh(theta) sqrt(w w) + c (1 + mu^2/lambda^2 - 1)
        let pr = params();
        let p = PhasePoint::new(vec![1.4], vec![0.3]).unwrap();
        let g = grad_observable(Observable::MainH, &p, &pr).unwrap();
        let x2: f64 = 1.4 * 1.4;
        let w = ((1.0 + 0.36 / x2) * (1.0 + 1.21 / x2)).sqrt();
        assert!((g.d_theta[0] - 0.3f64.sinh() * w).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_observables() {
        let p = sample_phase_point(2, 1, 0.4, 1.0).unwrap();
        assert!(grad_observable(Observable::Position(2), &p, &params()).is_err());
        assert!(grad_observable(Observable::VanDiejen(3), &p, &params()).is_err());
        assert!(grad_observable(Observable::LaxCoefficient(5), &p, &params()).is_err());
    }
}
