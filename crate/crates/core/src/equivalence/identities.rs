//! Exact verification of the combinatorial identities behind the transform.
//!
//! Everything here is big-integer or big-rational arithmetic; a check either
//! holds exactly or reports a counterexample.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::exact::{
    coeff_matrix_with, forward_entries, forward_entry_int, forward_entry_rational, forward_entry_value,
    mat_mul, BinomialTable, CoeffFlavor,
};
use crate::error::{Error, Result};

const MAX_RECORDED_FAILURES: usize = 16;

/// Outcome of one family of exact checks.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub description: &'static str,
    pub n_range: [usize; 2],
    pub cells_checked: u64,
    /// Cells where the rational coefficient is `0/0` and the integer limit was used.
    pub limit_cells: u64,
    pub failures: Vec<String>,
}

impl IdentityCheck {
    fn new(identity: &'static str, description: &'static str, n_range: [usize; 2]) -> Self {
        IdentityCheck {
            identity,
            description,
            n_range,
            cells_checked: 0,
            limit_cells: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cells_checked += 1;
        if !ok && self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One `(n, j, k) -> (a, b)` row of the coordinate change used by the
/// entrywise induction identity.
#[derive(Debug, Clone, Serialize)]
pub struct SubstitutionRow {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n_max: usize,
    pub checks: Vec<IdentityCheck>,
    pub substitution: &'static str,
    pub substitution_samples: Vec<SubstitutionRow>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn total_cells(&self) -> u64 {
        self.checks.iter().map(|c| c.cells_checked).sum()
    }

    pub fn check(&self, identity: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }
}

fn pow2(e: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

/// `D A(n) D B(n) = I` with `D = diag((-1)^j)`, for `1 <= n <= n_max`.
fn check_inverse_pair(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "inverse_pair",
        "D A(n) D B(n) = I in exact integers, D = diag((-1)^j)",
        [1, n_max],
    );
    for n in 1..=n_max {
        let a = coeff_matrix_with(table, n, n, CoeffFlavor::ForwardA).expect("valid size");
        let b = coeff_matrix_with(table, n, n, CoeffFlavor::InverseB).expect("valid size");
        let dad: Vec<Vec<BigInt>> = a
            .entries()
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.iter()
                    .enumerate()
                    .map(|(k, x)| if (j + k) % 2 == 0 { x.clone() } else { -x })
                    .collect()
            })
            .collect();
        let product = mat_mul(&dad, b.entries());
        for (j, row) in product.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let expected = if j == k { BigInt::one() } else { BigInt::zero() };
                check.record(*x == expected, || format!("n={n} ({j},{k}): got {x}"));
            }
        }
    }
    check
}

/// Integer form `C(a,b) + C(a-1,b-1)` equals `(a+b)/a C(a,b)` wherever `a != 0`.
fn check_forward_forms(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "forward_rational_form",
        "C(a,b) + C(a-1,b-1) = (a+b)/a C(a,b) for every forward entry with a != 0",
        [1, n_max],
    );
    for n in 1..=n_max as i64 {
        for j in 0..=n {
            for k in 0..=j {
                let (a, b) = (2 * n - j - k, j - k);
                match forward_entry_rational(table, a, b) {
                    Some(r) => {
                        let int = BigRational::from_integer(forward_entry_int(table, a, b));
                        check.record(r == int, || format!("n={n} ({j},{k}): {r} vs {int}"));
                    }
                    None => {
                        check.limit_cells += 1;
                        check.record(forward_entry_int(table, a, b).is_one(), || {
                            format!("n={n} ({j},{k}): limit entry is not 1")
                        });
                    }
                }
            }
        }
    }
    check
}

/// For all `0 <= s <= l <= n`:
/// `sum_a A(n)_{l, s+2a} C(n-s, a) / C(n-s, l-s) = 2^{l-s}`.
fn check_weighted_sums(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "weighted_binomial_sum",
        "sum_a 2(n-s-2a)/(2(n-s-2a)-(l-s-2a)) C(2n-l-s-2a, l-s-2a) C(n-s,a) / C(n-s,l-s) = 2^(l-s)",
        [1, n_max],
    );
    for n in 1..=n_max as i64 {
        for l in 0..=n {
            for s in 0..=l {
                let mut total = BigRational::zero();
                for a in 0..=(l - s) / 2 {
                    let col = s + 2 * a;
                    let (ca, cb) = (2 * n - l - col, l - col);
                    if forward_entry_rational(table, ca, cb).is_none() {
                        check.limit_cells += 1;
                    }
                    total += forward_entry_value(table, ca, cb) * table.get_rational(n - s, a);
                }
                total /= table.get_rational(n - s, l - s);
                let expected = pow2((l - s) as usize);
                check.record(total == expected, || {
                    format!("n={n} l={l} |J|={s}: got {total}, expected {expected}")
                });
            }
        }
    }
    check
}

/// The `n = l` specialisation: split sums of `C(d, a)` equal `2^d`.
fn check_split_sums(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "split_binomial_sums",
        "2 sum_{a<=d/2} C(d,a) = 2^d (d odd); 2 sum_{a<d/2} C(d,a) + C(d,d/2) = 2^d (d even)",
        [0, n_max],
    );
    for d in 0..=n_max as i64 {
        let lhs = if d % 2 == 1 {
            (0..=d / 2).fold(BigInt::zero(), |acc, a| acc + table.get(d, a)) * 2
        } else {
            (0..d / 2).fold(BigInt::zero(), |acc, a| acc + table.get(d, a)) * 2 + table.get(d, d / 2)
        };
        let expected = BigInt::one() << d as usize;
        check.record(lhs == expected, || format!("d={d}: got {lhs}"));
    }
    check
}

/// Degree-one polynomial `constant + slope * c` with `c = cosh(alpha)`.
#[derive(Debug, Clone, PartialEq)]
struct Linear<T> {
    constant: T,
    slope: T,
}

/// The entrywise induction identity in coordinates `a = 2n-j-k`, `b = j-k`:
///
/// `E(a,b) - 4 sinh^2(alpha/2) E(a+1,b-1)
///   = E(a+2,b) - 2 cosh(alpha) E(a+1,b-1) + E(a,b-2)`
///
/// with `E(a,b) = (a+b)/a C(a,b)`, compared coefficientwise in `cosh(alpha)`
/// after `4 sinh^2(alpha/2) = 2 cosh(alpha) - 2`.
fn check_entrywise_step(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "entrywise_induction_step",
        "E(a,b) - 4sinh^2(x/2) E(a+1,b-1) = E(a+2,b) - 2cosh(x) E(a+1,b-1) + E(a,b-2), E(a,b) = (a+b)/a C(a,b)",
        [1, n_max],
    );
    let two = BigRational::from_integer(BigInt::from(2));
    for n in 1..=n_max as i64 {
        for j in 0..=n {
            for k in 0..=j {
                let (a, b) = (2 * n - j - k, j - k);
                if a == 0 {
                    check.limit_cells += 1;
                }
                let t1 = forward_entry_value(table, a, b);
                let t2 = forward_entry_value(table, a + 1, b - 1);
                let t3 = forward_entry_value(table, a + 2, b);
                let t4 = forward_entry_value(table, a + 1, b - 1);
                let t5 = forward_entry_value(table, a, b - 2);
                let lhs = Linear {
                    constant: &t1 + &two * &t2,
                    slope: -(&two * &t2),
                };
                let rhs = Linear {
                    constant: &t3 + &t5,
                    slope: -(&two * &t4),
                };
                check.record(lhs == rhs, || {
                    format!("n={n} (j,k)=({j},{k}) (a,b)=({a},{b}): {lhs:?} vs {rhs:?}")
                });
            }
        }
    }
    check
}

/// `H(n,n+1) A(n) = A(n+1) K(n,n+1)` as matrices of degree-one polynomials in
/// `c = cosh(alpha)`, with `H(n,n+1) = I - (2c-2) I_{-1}` and
/// `K(n,n+1) = I - 2c I_{-1} + I_{-2}`.
fn check_matrix_step(table: &BinomialTable, n_max: usize) -> IdentityCheck {
    let mut check = IdentityCheck::new(
        "matrix_induction_step",
        "H(n,n+1) A(n) = A(n+1) K(n,n+1) with polynomial entries in cosh(alpha)",
        [1, n_max],
    );
    let entry = |m: &[Vec<BigInt>], j: i64, k: i64| -> BigInt {
        if j < 0 || k < 0 || j as usize >= m.len() || k as usize >= m.len() {
            BigInt::zero()
        } else {
            m[j as usize][k as usize].clone()
        }
    };
    for n in 1..=n_max {
        let a_n = forward_entries(table, n, n);
        let a_next = forward_entries(table, n + 1, n);
        for j in 0..=n as i64 {
            for k in 0..=n as i64 {
                // (I - (2c - 2) I_{-1}) A(n): row j picks A_{jk} and A_{j-1,k}
                let prev = entry(&a_n, j - 1, k);
                let lhs = Linear {
                    constant: entry(&a_n, j, k) + &prev * BigInt::from(2),
                    slope: -(prev * BigInt::from(2)),
                };
                // A(n+1) (I - 2c I_{-1} + I_{-2}): column k picks A_{jk}, A_{j,k+1}, A_{j,k+2}
                let rhs = Linear {
                    constant: entry(&a_next, j, k) + entry(&a_next, j, k + 2),
                    slope: -(entry(&a_next, j, k + 1) * BigInt::from(2)),
                };
                check.record(lhs == rhs, || format!("n={n} ({j},{k}): {lhs:?} vs {rhs:?}"));
            }
        }
    }
    check
}

/// Runs every exact check for `1 <= n <= n_max`.
///
/// Returns `IdentityFailure` carrying the first counterexample if anything
/// fails.
pub fn verify_exact_identities(n_max: usize) -> Result<IdentityReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if n_max > 200 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} is too large")));
    }
    let table = BinomialTable::new(2 * n_max + 6);
    let checks = vec![
        check_inverse_pair(&table, n_max),
        check_forward_forms(&table, n_max),
        check_weighted_sums(&table, n_max),
        check_split_sums(&table, n_max),
        check_entrywise_step(&table, n_max),
        check_matrix_step(&table, n_max),
    ];
    let substitution_samples = (0..=1usize)
        .flat_map(|j| (0..=j).map(move |k| (j, k)))
        .map(|(j, k)| SubstitutionRow {
            n: 1,
            j,
            k,
            a: 2 - j as i64 - k as i64,
            b: j as i64 - k as i64,
        })
        .collect();
    let report = IdentityReport {
        n_max,
        checks,
        substitution: "a = 2n - j - k, b = j - k, alpha = q_{n+1}",
        substitution_samples,
    };
    if let Some(first) = report.checks.iter().find(|c| !c.passed()) {
        return Err(Error::IdentityFailure(format!(
            "{}: {}",
            first.identity, first.failures[0]
        )));
    }
    Ok(report)
}
