//! The linear equivalence between van Diejen's family `H_l` and the Lax
//! invariants `K_m`.
//!
//! Both families, pulled back to the action variables `q`, are combinations of
//!
//! ```text
//! M_k(q) = sum_{|J| = k, eps} cosh(q_{eps J})
//! cH_l   = sum_{k <= l} (-2)^{l-k} C(n-k, l-k) M_k
//! cK_m   = (-1)^m sum_{a <= m/2} C(n-(m-2a), a) M_{m-2a}
//! ```
//!
//! and are related by a unit lower-triangular integer matrix and its explicit
//! inverse:
//!
//! ```text
//! (-1)^j H_j = sum_k A(n)_{jk} K_k,       A(n)_{jk} = C(a, b) + C(a-1, b-1)
//! (-1)^m K_m = sum_l C(2(n-l), m-l) H_l
//! ```
//!
//! with `a = 2n-j-k`, `b = j-k`. The same relations hold between the
//! phase-space values `H_l(lambda, theta)` and `K_m(lambda, theta)`.

mod exact;
mod identities;

pub use exact::{binomial_f64, BinomialTable, CoeffFlavor, ExactCoeffMatrix, coeff_matrix};
pub use identities::{verify_exact_identities, IdentityCheck, IdentityReport, SubstitutionRow};

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use num_traits::Zero;

use crate::scalar::{Dd, Field, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvariantKind {
    VanDiejen,
    LaxSpectral,
    AuxiliaryM,
}

/// Values `(X_0, ..., X_l)` of one family at a point, `X_0 = 1`.
///
/// Plain values: the alternating signs of the transform are applied inside
/// [`vd_from_lax`] / [`lax_from_vd`], never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantVector {
    kind: InvariantKind,
    values: Vec<f64>,
    n: usize,
}

impl InvariantVector {
    pub fn new(kind: InvariantKind, values: Vec<f64>, n: usize) -> Result<Self> {
        if values.is_empty() || values.len() > n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                found: values.len(),
            });
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "zeroth invariant must be 1, got {}",
                values[0]
            )));
        }
        Ok(InvariantVector { kind, values, n })
    }

    pub fn kind(&self) -> InvariantKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest level `l` stored.
    pub fn level(&self) -> usize {
        self.values.len() - 1
    }
}

fn check_level(level: usize, n: usize, what: &str) -> Result<()> {
    if level > n {
        return Err(Error::InvalidArgument(format!("{what} = {level} exceeds n = {n}")));
    }
    Ok(())
}

/// `M_k` over any real scalar, by literal enumeration of signed subsets.
fn m_sum<S: Real>(k: usize, q: &[S]) -> S {
    if k == 0 {
        return S::one();
    }
    let mut total = S::zero();
    for subset in (0..q.len()).combinations(k) {
        for mask in 0u64..(1u64 << k) {
            let arg = subset.iter().enumerate().fold(S::zero(), |acc, (pos, &j)| {
                if mask >> pos & 1 == 0 {
                    acc + q[j]
                } else {
                    acc - q[j]
                }
            });
            total += arg.cosh();
        }
    }
    total
}

/// `M_0..M_top` in extended precision: the alternating sums defining `cH_l`
/// cancel heavily when the actions are small.
fn m_values(top: usize, q: &[f64]) -> Vec<Dd> {
    let q: Vec<Dd> = q.iter().map(|&x| Dd::from(x)).collect();
    (0..=top).map(|k| m_sum(k, &q)).collect()
}

/// `M_k(q)`: sum of `cosh(sum_{j in J} eps_j q_j)` over `|J| = k` and all signs.
pub fn eval_m(k: usize, q: &[f64]) -> Result<f64> {
    check_level(k, q.len(), "k")?;
    Ok(m_values(k, q)[k].value())
}

fn ch_from_m(l: usize, n: usize, m: &[Dd]) -> f64 {
    (0..=l)
        .fold(Dd::zero(), |acc, k| {
            let coeff = (-2f64).powi((l - k) as i32) * binomial_f64(n - k, l - k);
            acc + Dd::from(coeff) * m[k]
        })
        .value()
}

fn ck_from_m(order: usize, n: usize, m: &[Dd]) -> f64 {
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (0..=order / 2)
        .fold(Dd::zero(), |acc, a| {
            acc + Dd::from(binomial_f64(n - (order - 2 * a), a)) * m[order - 2 * a]
        })
        .value()
}

/// Pullback `cH_l(q)` of van Diejen's `H_l` to the actions.
pub fn eval_ch(l: usize, q: &[f64]) -> Result<f64> {
    let n = q.len();
    check_level(l, n, "l")?;
    Ok(ch_from_m(l, n, &m_values(l, q)))
}

/// Pullback `cK_m(q)` of the Lax invariant `K_m` to the actions.
pub fn eval_ck(order: usize, q: &[f64]) -> Result<f64> {
    let n = q.len();
    check_level(order, n, "m")?;
    Ok(ck_from_m(order, n, &m_values(order, q)))
}

/// `(cH_0, ..., cH_n)`.
pub fn eval_all_ch(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let m = m_values(n, q);
    (0..=n).map(|l| ch_from_m(l, n, &m)).collect()
}

/// `(cK_0, ..., cK_n)`.
pub fn eval_all_ck(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let m = m_values(n, q);
    (0..=n).map(|k| ck_from_m(k, n, &m)).collect()
}

/// Elementary symmetric polynomial `e_l(values)`.
pub fn elem_sym(values: &[f64], l: usize) -> Result<f64> {
    if l > values.len() {
        return Err(Error::InvalidArgument(format!(
            "l = {l} exceeds the number of variables {}",
            values.len()
        )));
    }
    let mut e = vec![0.0; l + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=l.min(i + 1)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    Ok(e[l])
}

/// Floating-point copies of the forward and inverse coefficient matrices for
/// one `(n, l)`.
#[derive(Debug, Clone)]
pub struct Transform {
    n: usize,
    forward: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
}

impl Transform {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 || l > n {
            return Err(Error::InvalidArgument(format!("need 0 <= l <= n, n >= 1 (n = {n}, l = {l})")));
        }
        let table = BinomialTable::new(2 * n + 2);
        let forward = exact::forward_entries(&table, n, l);
        let inverse = exact::inverse_entries(&table, n, l);
        Ok(Transform {
            n,
            forward: exact::to_f64_rows(&forward),
            inverse: exact::to_f64_rows(&inverse),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.forward.len() - 1
    }

    /// `H_j = (-1)^j sum_k A_jk K_k`.
    pub fn vd_from_lax(&self, k: &[f64]) -> Vec<f64> {
        self.forward
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let s: f64 = row.iter().zip(k).take(j + 1).map(|(a, x)| a * x).sum();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect()
    }

    /// `K_m = (-1)^m sum_l B_ml H_l`.
    pub fn lax_from_vd(&self, h: &[f64]) -> Vec<f64> {
        self.inverse
            .iter()
            .enumerate()
            .map(|(m, row)| {
                let s: f64 = row.iter().zip(h).take(m + 1).map(|(b, x)| b * x).sum();
                if m % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect()
    }
}

fn check_transform_input(v: &InvariantVector, expected: InvariantKind, n: usize) -> Result<()> {
    if v.kind() != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected:?} invariants, got {:?}",
            v.kind()
        )));
    }
    if v.n() != n || v.level() > n {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            found: v.values().len(),
        });
    }
    Ok(())
}

/// Van Diejen values `(H_0..H_l)` from Lax invariants `(K_0..K_l)`.
pub fn vd_from_lax(k: &InvariantVector, n: usize) -> Result<InvariantVector> {
    check_transform_input(k, InvariantKind::LaxSpectral, n)?;
    let t = Transform::new(n, k.level())?;
    InvariantVector::new(InvariantKind::VanDiejen, t.vd_from_lax(k.values()), n)
}

/// Lax invariants `(K_0..K_l)` from van Diejen values `(H_0..H_l)`.
pub fn lax_from_vd(h: &InvariantVector, n: usize) -> Result<InvariantVector> {
    check_transform_input(h, InvariantKind::VanDiejen, n)?;
    let t = Transform::new(n, h.level())?;
    InvariantVector::new(InvariantKind::LaxSpectral, t.lax_from_vd(h.values()), n)
}

/// Residuals of the one-variable recursions, relative to `1 + |lhs|`.
#[derive(Debug, Clone, Serialize)]
pub struct RecursionReport {
    /// `cH_l(q, x) - [cH_l(q) + 4 sinh^2(x/2) cH_{l-1}(q)]`, `l = 0..n`.
    pub h_residuals: Vec<f64>,
    /// `cK_k(q, x) - [cK_k(q) - 2 cosh(x) cK_{k-1}(q) + cK_{k-2}(q)]`, `k = 0..n`.
    pub k_residuals: Vec<f64>,
}

impl RecursionReport {
    pub fn max(&self) -> f64 {
        self.h_residuals
            .iter()
            .chain(&self.k_residuals)
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Checks the recursions obtained by appending the variable `q_extra` to `q`.
pub fn verify_recursions(q: &[f64], q_extra: f64) -> RecursionReport {
    let n = q.len();
    let mut extended = q.to_vec();
    extended.push(q_extra);
    let (ch, ck) = (eval_all_ch(q), eval_all_ck(q));
    let (ch_ext, ck_ext) = (eval_all_ch(&extended), eval_all_ck(&extended));
    let s = 4.0 * (q_extra / 2.0).sinh().powi(2);
    let c = 2.0 * q_extra.cosh();
    let at = |v: &[f64], i: isize| if i < 0 { 0.0 } else { v[i as usize] };
    let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / (1.0 + lhs.abs());
    let h_residuals = (0..=n)
        .map(|l| rel(ch_ext[l], ch[l] + s * at(&ch, l as isize - 1)))
        .collect();
    let k_residuals = (0..=n)
        .map(|k| {
            let k = k as isize;
            rel(
                ck_ext[k as usize],
                at(&ck, k) - c * at(&ck, k - 1) + at(&ck, k - 2),
            )
        })
        .collect();
    RecursionReport {
        h_residuals,
        k_residuals,
    }
}
