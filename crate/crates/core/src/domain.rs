//! Couplings, phase points in the Weyl chamber, action vectors and signed subsets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum gap enforced between neighbouring positions (and between the last
/// position and the wall at 0) when validating a phase point.
pub const DEFAULT_GUARD: f64 = 1e-9;

/// The three real couplings `(mu, nu, kappa)`.
///
/// Valid iff `mu != 0`, `nu != 0` and `nu * kappa >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    mu: f64,
    nu: f64,
    kappa: f64,
}

impl Params {
    pub fn new(mu: f64, nu: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu), ("kappa", kappa)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if mu == 0.0 {
            return Err(Error::ZeroCoupling { name: "mu" });
        }
        if nu == 0.0 {
            return Err(Error::ZeroCoupling { name: "nu" });
        }
        if nu * kappa < 0.0 {
            return Err(Error::SignViolation { nu, kappa });
        }
        Ok(Params { mu, nu, kappa })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Same as [`Params::new`].
pub fn validate_params(mu: f64, nu: f64, kappa: f64) -> Result<Params> {
    Params::new(mu, nu, kappa)
}

/// A point `(lambda, theta)` of the phase space: positions in the open Weyl
/// chamber `lambda_1 > ... > lambda_n > 0` and arbitrary momenta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    lambda: Vec<f64>,
    theta: Vec<f64>,
}

impl PhasePoint {
    pub fn new(lambda: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        Self::with_guard(lambda, theta, DEFAULT_GUARD)
    }

    /// Validates with a custom minimum gap instead of [`DEFAULT_GUARD`].
    pub fn with_guard(lambda: Vec<f64>, theta: Vec<f64>, guard: f64) -> Result<Self> {
        if lambda.len() != theta.len() {
            return Err(Error::LengthMismatch {
                expected: lambda.len(),
                found: theta.len(),
            });
        }
        if lambda.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(x) = lambda.iter().chain(&theta).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {x}")));
        }
        check_chamber(&lambda, guard)?;
        Ok(PhasePoint { lambda, theta })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// The point `(lambda, -theta)`.
    pub fn reversed(&self) -> PhasePoint {
        PhasePoint {
            lambda: self.lambda.clone(),
            theta: self.theta.iter().map(|t| -t).collect(),
        }
    }
}

/// Same as [`PhasePoint::new`].
pub fn validate_phase_point(lambda: &[f64], theta: &[f64]) -> Result<PhasePoint> {
    PhasePoint::new(lambda.to_vec(), theta.to_vec())
}

pub(crate) fn check_chamber(lambda: &[f64], guard: f64) -> Result<()> {
    for (index, w) in lambda.windows(2).enumerate() {
        if !(w[0] - w[1] >= guard) {
            return Err(Error::OrderingViolation {
                index,
                upper: w[0],
                lower: w[1],
                guard,
            });
        }
    }
    let last = lambda.len() - 1;
    if !(lambda[last] >= guard) {
        return Err(Error::NonPositive {
            index: last,
            value: lambda[last],
            guard,
        });
    }
    Ok(())
}

/// Collision check for the generic evaluators, which receive raw coordinate
/// slices rather than a validated [`PhasePoint`]: all `|lambda_j|` must be
/// nonzero and pairwise distinct.
pub(crate) fn check_no_collisions<S: Real>(lambda: &[S]) -> Result<()> {
    for (j, x) in lambda.iter().enumerate() {
        let xj = x.value();
        if xj == 0.0 || !xj.is_finite() {
            return Err(Error::Domain(format!("lambda[{j}] = {xj}")));
        }
        for (k, y) in lambda.iter().enumerate().skip(j + 1) {
            if xj.abs() == y.value().abs() {
                return Err(Error::Domain(format!(
                    "collision |lambda[{j}]| = |lambda[{k}]| = {}",
                    xj.abs()
                )));
            }
        }
    }
    Ok(())
}

/// Action variables `q`, strictly decreasing and positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionVector {
    q: Vec<f64>,
}

impl ActionVector {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyVector);
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("action".into()));
        }
        check_chamber(&q, 0.0).map_err(|e| Error::InvalidArgument(format!("actions: {e}")))?;
        Ok(ActionVector { q })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }
}

/// Minimum gap used by the verification sweeps.
pub const SWEEP_MIN_GAP: f64 = 0.5;
/// Momentum range used by the verification sweeps.
pub const SWEEP_THETA_RANGE: f64 = 1.0;

/// The 20 coupling triples used by the verification sweeps: four values of
/// `mu` (both signs) times five `(nu, kappa)` pairs covering `kappa = 0`,
/// both couplings negative, and mixed magnitudes.
pub fn sweep_params() -> Vec<Params> {
    let mus = [1.0, 0.5, -0.8, 1.7];
    let nu_kappa = [(0.5, 0.5), (1.0, 0.0), (-0.4, -0.9), (0.3, 1.2), (-1.1, -0.2)];
    mus.iter()
        .flat_map(|&mu| nu_kappa.iter().map(move |&(nu, kappa)| Params::new(mu, nu, kappa)))
        .collect::<Result<_>>()
        .expect("sweep couplings are admissible")
}

/// Uniformly sampled admissible phase point, deterministic in `seed`.
///
/// Neighbouring gaps (and `lambda_n`) are drawn from `[min_gap, 4 min_gap)`,
/// momenta from `[-theta_range, theta_range]`.
pub fn sample_phase_point(n: usize, seed: u64, min_gap: f64, theta_range: f64) -> Result<PhasePoint> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(min_gap >= DEFAULT_GUARD) || !min_gap.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "min_gap must be >= {DEFAULT_GUARD:e}, got {min_gap}"
        )));
    }
    if !(theta_range >= 0.0) || !theta_range.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "theta_range must be finite and nonnegative, got {theta_range}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps: Vec<f64> = (0..n)
        .map(|_| min_gap * (1.0 + 3.0 * rng.random::<f64>()))
        .collect();
    let mut lambda = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        acc += gaps[k];
        lambda[k] = acc;
    }
    let theta = (0..n)
        .map(|_| theta_range * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    PhasePoint::new(lambda, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn apply<S: Real>(self, x: S) -> S {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A subset `J` of `{0, ..., n-1}` (zero-based) with a sign attached to each member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignedSubset {
    indices: Vec<usize>,
    signs: Vec<Sign>,
}

impl SignedSubset {
    pub fn new(indices: Vec<usize>, signs: Vec<Sign>) -> Result<Self> {
        if indices.len() != signs.len() {
            return Err(Error::LengthMismatch {
                expected: indices.len(),
                found: signs.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "subset indices must be strictly increasing".into(),
            ));
        }
        Ok(SignedSubset { indices, signs })
    }

    pub fn empty() -> Self {
        SignedSubset {
            indices: Vec::new(),
            signs: Vec::new(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.indices.iter().copied().zip(self.signs.iter().copied())
    }

    /// `sum_{j in J} eps_j x_j`; zero for the empty subset.
    pub fn signed_sum<S: Real>(&self, x: &[S]) -> S {
        self.iter()
            .fold(S::zero(), |acc, (j, s)| acc + s.apply(x[j]))
    }

    /// The same index set with every sign flipped.
    pub fn negated(&self) -> SignedSubset {
        SignedSubset {
            indices: self.indices.clone(),
            signs: self.signs.iter().map(|s| s.flip()).collect(),
        }
    }

    /// `{0..n} \ J` in increasing order.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        let mut it = self.indices.iter().peekable();
        (0..n)
            .filter(|k| {
                if it.peek() == Some(&k) {
                    it.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }
}

/// Iterator over every signed subset with `|J| <= max_size`.
///
/// Index sets come in lexicographic order (`{} < {0} < {0,1} < {1}`), and for
/// each set the sign patterns count in binary with `+` before `-` and the last
/// index varying fastest.
#[derive(Debug, Clone)]
pub struct SignedSubsets {
    n: usize,
    max_size: usize,
    indices: Vec<usize>,
    mask: u64,
    done: bool,
}

impl SignedSubsets {
    fn advance_indices(&mut self) -> bool {
        if self.indices.len() < self.max_size {
            let next = self.indices.last().map_or(0, |&x| x + 1);
            if next < self.n {
                self.indices.push(next);
                return true;
            }
        }
        while let Some(x) = self.indices.pop() {
            if x + 1 < self.n {
                self.indices.push(x + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for SignedSubsets {
    type Item = SignedSubset;

    fn next(&mut self) -> Option<SignedSubset> {
        if self.done {
            return None;
        }
        let len = self.indices.len();
        let signs = (0..len)
            .map(|i| {
                if self.mask >> (len - 1 - i) & 1 == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        let item = SignedSubset {
            indices: self.indices.clone(),
            signs,
        };
        self.mask += 1;
        if self.mask == 1u64 << len {
            self.mask = 0;
            if !self.advance_indices() {
                self.done = true;
            }
        }
        Some(item)
    }
}

/// All signed subsets of `{0..n}` with at most `max_size` elements.
pub fn enumerate_signed_subsets(n: usize, max_size: usize) -> Result<SignedSubsets> {
    if max_size > n {
        return Err(Error::InvalidArgument(format!(
            "max_size {max_size} exceeds n = {n}"
        )));
    }
    if n > 40 {
        return Err(Error::InvalidArgument(format!("n = {n} is too large to enumerate")));
    }
    Ok(SignedSubsets {
        n,
        max_size,
        indices: Vec::new(),
        mask: 0,
        done: false,
    })
}

/// Number of signed subsets with `|J| <= max_size`: `sum_j C(n, j) 2^j`.
pub fn signed_subset_count(n: usize, max_size: usize) -> u128 {
    let mut binom: u128 = 1;
    let mut total: u128 = 0;
    for j in 0..=max_size.min(n) {
        total += binom << j;
        binom = binom * (n - j) as u128 / (j + 1) as u128;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn params_validation() {
        assert!(validate_params(1.0, 0.5, 0.25).is_ok());
        assert!(validate_params(1.0, 1.0, 0.0).is_ok());
        assert!(validate_params(-2.0, -1.0, -0.5).is_ok());
        assert_eq!(validate_params(0.0, 1.0, 1.0).unwrap_err().kind(), "ZeroCoupling");
        assert_eq!(validate_params(1.0, 0.0, 1.0).unwrap_err().kind(), "ZeroCoupling");
        assert_eq!(validate_params(1.0, 1.0, -1.0).unwrap_err().kind(), "SignViolation");
        assert_eq!(validate_params(f64::NAN, 1.0, 1.0).unwrap_err().kind(), "NonFinite");
        assert_eq!(
            validate_params(1.0, f64::INFINITY, 1.0).unwrap_err().kind(),
            "NonFinite"
        );
    }

    #[test]
    fn phase_point_validation() {
        assert!(validate_phase_point(&[2.0, 1.0], &[0.3, -0.7]).is_ok());
        let kind = |l: &[f64], t: &[f64]| validate_phase_point(l, t).unwrap_err().kind();
        assert_eq!(kind(&[1.0, 2.0], &[0.0, 0.0]), "OrderingViolation");
        assert_eq!(kind(&[1.0, -1.0], &[0.0, 0.0]), "NonPositive");
        assert_eq!(kind(&[1.0, 1.0], &[0.0, 0.0]), "OrderingViolation");
        assert_eq!(kind(&[1.0, 1.0 - 1e-12], &[0.0, 0.0]), "OrderingViolation");
        assert_eq!(kind(&[1.0], &[0.0, 0.0]), "LengthMismatch");
        assert_eq!(kind(&[], &[]), "EmptyVector");
        assert_eq!(kind(&[1.0], &[f64::NAN]), "NonFinite");
        assert_eq!(kind(&[0.0], &[0.0]), "NonPositive");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_phase_point(3, 7, 0.5, 3.0).unwrap();
        let b = sample_phase_point(3, 7, 0.5, 3.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_phase_point(3, 8, 0.5, 3.0).unwrap());
        assert_eq!(
            sample_phase_point(0, 1, 0.5, 1.0).unwrap_err().kind(),
            "InvalidArgument"
        );
        assert_eq!(
            sample_phase_point(2, 1, 0.0, 1.0).unwrap_err().kind(),
            "InvalidArgument"
        );
    }

    #[test]
    fn small_enumerations() {
        let items: Vec<_> = enumerate_signed_subsets(2, 1).unwrap().collect();
        let expected = vec![
            SignedSubset::empty(),
            SignedSubset::new(vec![0], vec![Sign::Plus]).unwrap(),
            SignedSubset::new(vec![0], vec![Sign::Minus]).unwrap(),
            SignedSubset::new(vec![1], vec![Sign::Plus]).unwrap(),
            SignedSubset::new(vec![1], vec![Sign::Minus]).unwrap(),
        ];
        assert_eq!(items, expected);

        let only_empty: Vec<_> = enumerate_signed_subsets(3, 0).unwrap().collect();
        assert_eq!(only_empty, vec![SignedSubset::empty()]);

        assert_eq!(enumerate_signed_subsets(3, 3).unwrap().count(), 27);
        assert!(enumerate_signed_subsets(2, 3).is_err());
    }

    #[test]
    fn lexicographic_index_order() {
        let sets: Vec<Vec<usize>> = enumerate_signed_subsets(3, 3)
            .unwrap()
            .map(|s| s.indices().to_vec())
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Vec::new(), |mut acc: Vec<Vec<usize>>, s| {
                if acc.last() != Some(&s) {
                    acc.push(s);
                }
                acc
            });
        let mut sorted = sets.clone();
        sorted.sort();
        assert_eq!(sets, sorted);
        assert_eq!(sets.len(), 8);
    }

    #[test]
    fn complement_and_signed_sum() {
        let s = SignedSubset::new(vec![1, 3], vec![Sign::Minus, Sign::Plus]).unwrap();
        assert_eq!(s.complement(5), vec![0, 2, 4]);
        assert_eq!(s.signed_sum(&[10.0, 1.0, 20.0, 2.5, 30.0]), 1.5);
        assert_eq!(SignedSubset::empty().signed_sum(&[1.0, 2.0]), 0.0);
        assert_eq!(s.negated().signed_sum(&[10.0, 1.0, 20.0, 2.5, 30.0]), -1.5);
    }

    proptest! {
        #[test]
        fn full_enumeration_is_three_to_the_n_without_duplicates(n in 1usize..=7) {
            let items: Vec<_> = enumerate_signed_subsets(n, n).unwrap().collect();
            prop_assert_eq!(items.len() as u128, 3u128.pow(n as u32));
            let unique: HashSet<_> = items.iter().cloned().collect();
            prop_assert_eq!(unique.len(), items.len());
        }

        #[test]
        fn enumeration_count_matches_formula(n in 1usize..=7, m in 0usize..=7) {
            let m = m.min(n);
            let count = enumerate_signed_subsets(n, m).unwrap().count() as u128;
            prop_assert_eq!(count, signed_subset_count(n, m));
        }

        #[test]
        fn samples_are_admissible(n in 1usize..=8, seed in any::<u64>(), gap in 1e-3f64..2.0, range in 0.0f64..4.0) {
            let p = sample_phase_point(n, seed, gap, range).unwrap();
            prop_assert!(validate_phase_point(p.lambda(), p.theta()).is_ok());
            prop_assert!(p.lambda()[n - 1] >= gap);
            for w in p.lambda().windows(2) {
                prop_assert!(w[0] - w[1] >= gap * (1.0 - 1e-12));
            }
            prop_assert!(p.theta().iter().all(|t| t.abs() <= range));
        }

        #[test]
        fn params_validation_is_idempotent(mu in -3.0f64..3.0, nu in -3.0f64..3.0, kappa in -3.0f64..3.0) {
            if let Ok(p) = validate_params(mu, nu, kappa) {
                prop_assert_eq!(validate_params(p.mu(), p.nu(), p.kappa()).unwrap(), p);
            }
        }
    }
}
