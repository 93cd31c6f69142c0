//! Exact big-integer coefficient matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Pascal's triangle of big integers, immutable once built.
///
/// `C(a, b) = 0` whenever `a < 0`, `b < 0` or `b > a`; in particular
/// `C(-1, -1) = 0`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialTable {
    /// Table covering `0 <= a <= max_a`.
    pub fn new(max_a: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_a + 1);
        rows.push(vec![BigInt::one()]);
        for a in 1..=max_a {
            let prev = &rows[a - 1];
            let mut row = Vec::with_capacity(a + 1);
            row.push(BigInt::one());
            for b in 1..a {
                row.push(&prev[b - 1] + &prev[b]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        BinomialTable { rows }
    }

    pub fn max_a(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, a: i64, b: i64) -> BigInt {
        if a < 0 || b < 0 || b > a {
            return BigInt::zero();
        }
        let row = self
            .rows
            .get(a as usize)
            .unwrap_or_else(|| panic!("binomial table too small for C({a}, {b})"));
        row[b as usize].clone()
    }

    pub fn get_rational(&self, a: i64, b: i64) -> BigRational {
        BigRational::from_integer(self.get(a, b))
    }
}

/// `C(n, k)` as `f64` (exact for the sizes used in the numeric transforms).
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Forward entry in `(a, b) = (2n-j-k, j-k)` coordinates, integer form
/// `C(a, b) + C(a-1, b-1)`.
pub(crate) fn forward_entry_int(table: &BinomialTable, a: i64, b: i64) -> BigInt {
    if b < 0 {
        return BigInt::zero();
    }
    table.get(a, b) + table.get(a - 1, b - 1)
}

/// Forward entry in rational form `(a + b)/a * C(a, b)`; `None` when `a = 0`.
pub(crate) fn forward_entry_rational(table: &BinomialTable, a: i64, b: i64) -> Option<BigRational> {
    if b < 0 {
        return Some(BigRational::zero());
    }
    if a == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(a + b), BigInt::from(a)) * table.get_rational(a, b))
}

/// Rational form where defined, integer limit at `a = 0`.
pub(crate) fn forward_entry_value(table: &BinomialTable, a: i64, b: i64) -> BigRational {
    forward_entry_rational(table, a, b)
        .unwrap_or_else(|| BigRational::from_integer(forward_entry_int(table, a, b)))
}

pub(crate) fn forward_entries(table: &BinomialTable, n: usize, l: usize) -> Vec<Vec<BigInt>> {
    let n = n as i64;
    (0..=l as i64)
        .map(|j| {
            (0..=l as i64)
                .map(|k| {
                    if j < k {
                        BigInt::zero()
                    } else {
                        forward_entry_int(table, 2 * n - j - k, j - k)
                    }
                })
                .collect()
        })
        .collect()
}

pub(crate) fn inverse_entries(table: &BinomialTable, n: usize, l: usize) -> Vec<Vec<BigInt>> {
    let n = n as i64;
    (0..=l as i64)
        .map(|m| {
            (0..=l as i64)
                .map(|k| {
                    if m < k {
                        BigInt::zero()
                    } else {
                        table.get(2 * (n - k), m - k)
                    }
                })
                .collect()
        })
        .collect()
}

pub(crate) fn to_f64_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoeffFlavor {
    /// `A(n)`: van Diejen values (alternating signs) from Lax invariants.
    ForwardA,
    /// `B(n)`: Lax invariants (alternating signs) from van Diejen values.
    InverseB,
}

/// `(l+1) x (l+1)` unit lower-triangular big-integer matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCoeffMatrix {
    #[serde(serialize_with = "serialize_entries")]
    entries: Vec<Vec<BigInt>>,
    n: usize,
    flavor: CoeffFlavor,
}

fn serialize_entries<S: serde::Serializer>(entries: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(entries.len()))?;
    for row in entries {
        let row: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl ExactCoeffMatrix {
    pub fn entries(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> CoeffFlavor {
        self.flavor
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, j: usize, k: usize) -> &BigInt {
        &self.entries[j][k]
    }

    /// Entries as `u64` when they all fit, e.g. for printing.
    pub fn to_u64_rows(&self) -> Option<Vec<Vec<u64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.to_u64()).collect())
            .collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        to_f64_rows(&self.entries)
    }

    /// Exact product `self * other`.
    pub fn mul_exact(&self, other: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        mat_mul(&self.entries, other)
    }
}

pub(crate) fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let size = a.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![BigInt::zero(); cols]; size];
    for (i, row) in a.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] += x * &b[k][j];
                }
            }
        }
    }
    out
}

/// Exact coefficient matrix of the given flavor, `1 <= l <= n`.
pub fn coeff_matrix(n: usize, l: usize, flavor: CoeffFlavor) -> Result<ExactCoeffMatrix> {
    if l < 1 || l > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= l <= n (n = {n}, l = {l})"
        )));
    }
    let table = BinomialTable::new(2 * n + 1);
    coeff_matrix_with(&table, n, l, flavor)
}

pub(crate) fn coeff_matrix_with(
    table: &BinomialTable,
    n: usize,
    l: usize,
    flavor: CoeffFlavor,
) -> Result<ExactCoeffMatrix> {
    let entries = match flavor {
        CoeffFlavor::ForwardA => forward_entries(table, n, l),
        CoeffFlavor::InverseB => inverse_entries(table, n, l),
    };
    Ok(ExactCoeffMatrix { entries, n, flavor })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(m: &ExactCoeffMatrix) -> Vec<Vec<u64>> {
        m.to_u64_rows().unwrap()
    }

    #[test]
    fn two_by_two_matrices() {
        let a = coeff_matrix(1, 1, CoeffFlavor::ForwardA).unwrap();
        let b = coeff_matrix(1, 1, CoeffFlavor::InverseB).unwrap();
        assert_eq!(small(&a), vec![vec![1, 0], vec![2, 1]]);
        assert_eq!(small(&b), vec![vec![1, 0], vec![2, 1]]);
        assert!(coeff_matrix(2, 0, CoeffFlavor::ForwardA).is_err());
        assert!(coeff_matrix(2, 3, CoeffFlavor::InverseB).is_err());
    }

    #[test]
    fn three_by_three_forward() {
        // n = 2: A_10 = 4, A_20 = 4/2 * C(2, 2) = 2... via integer form C(2,2)+C(1,1) = 2,
        // A_21 = C(1,1)+C(0,0) = 2, A_11 = C(2,0)+C(1,-1) = 1, A_22 = C(0,0) = 1.
        let a = coeff_matrix(2, 2, CoeffFlavor::ForwardA).unwrap();
        assert_eq!(small(&a), vec![vec![1, 0, 0], vec![4, 1, 0], vec![2, 2, 1]]);
        let b = coeff_matrix(2, 2, CoeffFlavor::InverseB).unwrap();
        assert_eq!(small(&b), vec![vec![1, 0, 0], vec![4, 1, 0], vec![6, 2, 1]]);
    }

    #[test]
    fn binomial_conventions() {
        let t = BinomialTable::new(10);
        assert_eq!(t.get(-1, -1), BigInt::zero());
        assert_eq!(t.get(5, -1), BigInt::zero());
        assert_eq!(t.get(5, 6), BigInt::zero());
        assert_eq!(t.get(10, 5), BigInt::from(252));
        assert_eq!(binomial_f64(10, 5), 252.0);
        assert_eq!(binomial_f64(3, 4), 0.0);
    }

    #[test]
    fn rational_form_agrees_where_defined() {
        let t = BinomialTable::new(40);
        for a in 0..=18i64 {
            for b in -2..=18i64 {
                match forward_entry_rational(&t, a, b) {
                    Some(r) => assert_eq!(r, BigRational::from_integer(forward_entry_int(&t, a, b))),
                    None => assert_eq!(a, 0),
                }
            }
        }
        assert_eq!(forward_entry_int(&t, 0, 0), BigInt::one());
    }
}
