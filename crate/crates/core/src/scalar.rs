//! Scalar abstraction shared by the plain and the differentiated evaluation paths.
//!
//! Every formula that feeds Hamilton's equations or a Poisson bracket is written
//! once, generically over [`Real`]. Instantiating it with `f64` gives values;
//! instantiating it with [`Dual`] gives values together with one directional
//! derivative (forward-mode automatic differentiation). Complex quantities are
//! `num_complex::Complex<S>` over either scalar.
//!
//! Purely algebraic code (matrix products, the trace recursion) only needs
//! [`Field`]. Each field has an [`Field::Extended`] counterpart with roughly twice
//! the working precision ([`Dd`] for `f64`), used where cancellation would
//! otherwise eat all significant digits.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// Ordered field with square roots.
pub trait Field:
    Num
    + Copy
    + Debug
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// The same field carried at extended working precision.
    type Extended: Field;

    fn from_f64(x: f64) -> Self;
    /// The primal (non-infinitesimal) part, rounded to `f64`.
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn extend(self) -> Self::Extended;
    fn from_extended(x: Self::Extended) -> Self;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc * self)
    }
}

/// Real scalar with the elementary transcendental functions.
pub trait Real: Field {
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
}

impl Field for f64 {
    type Extended = Dd;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn extend(self) -> Dd {
        Dd::from(self)
    }
    #[inline]
    fn from_extended(x: Dd) -> Self {
        x.hi
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn powi(self, k: u32) -> Self {
        f64::powi(self, k as i32)
    }
}

impl Real for f64 {
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
}

/// Modulus of a complex number over any [`Field`].
pub fn modulus<S: Field>(z: Complex<S>) -> S {
    z.norm_sqr().sqrt()
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi) / 2`, about 32
/// significant decimal digits.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    fn renormalized(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::renormalized(p, e + self.lo * b)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renormalized(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        Dd::renormalized(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        Dd::renormalized(q1, q2) + Dd::from(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = (self / rhs).hi.trunc();
        self - rhs.mul_f64(q)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

macro_rules! assign_ops {
    ($t:ty) => {
        impl AddAssign for $t {
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, rhs: Self) {
                *self = *self - rhs;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, rhs: Self) {
                *self = *self * rhs;
            }
        }
        impl DivAssign for $t {
            fn div_assign(&mut self, rhs: Self) {
                *self = *self / rhs;
            }
        }
    };
}

assign_ops!(Dd);

impl Zero for Dd {
    fn zero() -> Self {
        Dd::from(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from)
    }
}

impl Field for Dd {
    type Extended = Dd;

    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn value(self) -> f64 {
        self.hi + self.lo
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::zero() } else { Dd::from(f64::NAN) };
        }
        // one Newton step from the f64 root doubles the precision
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let residual = self - Dd::new(p, e);
        Dd::renormalized(s, residual.hi / (2.0 * s))
    }
    fn extend(self) -> Dd {
        self
    }
    fn from_extended(x: Dd) -> Self {
        x
    }
}

const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);

impl Dd {
    /// `self * 2^k`, exact barring overflow or underflow.
    fn scale_pow2(self, k: i32) -> Dd {
        let half = 2f64.powi(k / 2);
        let rest = 2f64.powi(k - k / 2);
        Dd::new(self.hi * half * rest, self.lo * half * rest)
    }

    /// `sum x^j / j!` for `j >= 1`, for small `|x|`.
    fn expm1_taylor(self) -> Dd {
        let mut term = self;
        let mut sum = self;
        for j in 2..30 {
            term = term * self / Dd::from(j as f64);
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() {
                break;
            }
        }
        sum
    }
}

impl Real for Dd {
    fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::zero();
        }
        // exp(x) = 2^k exp(r)^(2^10) with x = k ln 2 + 2^10 r
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).scale_pow2(-10);
        let mut em1 = r.expm1_taylor();
        for _ in 0..10 {
            // (1 + e)^2 - 1 = e (2 + e)
            em1 = em1 * (Dd::from(2.0) + em1);
        }
        (Dd::one() + em1).scale_pow2(k as i32)
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        // one Newton step on exp(y) = x from the f64 logarithm
        let y = Dd::from(self.hi.ln());
        y + self * (-y).exp() - Dd::one()
    }
    fn cosh(self) -> Self {
        let e = self.abs().exp();
        (e + Dd::one() / e).scale_pow2(-1)
    }
    fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            // odd Taylor series avoids the cancellation in (e - 1/e) / 2
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            for j in 1..30 {
                term = term * x2 / Dd::from(((2 * j) * (2 * j + 1)) as f64);
                sum += term;
                if term.hi.abs() <= 1e-36 * sum.hi.abs() {
                    break;
                }
            }
            return sum;
        }
        let e = self.exp();
        (e - Dd::one() / e).scale_pow2(-1)
    }
}

/// Dual number `re + du·ε` with `ε² = 0` over a base field `T`.
///
/// Comparisons look at the real part only.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dual<T = f64> {
    pub re: T,
    pub du: T,
}

impl<T: Field> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, du: T::zero() }
    }

    /// Independent variable seeded with unit derivative.
    pub fn variable(re: T) -> Self {
        Dual { re, du: T::one() }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual {
            re: f,
            du: df * self.du,
        }
    }
}

impl<T: PartialEq> PartialEq for Dual<T> {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re
    }
}

impl<T: PartialOrd> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<T: Field> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<T: Field> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<T: Field> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.du * rhs.re + self.re * rhs.du)
    }
}

impl<T: Field> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.re;
        let re = self.re * inv;
        Dual::new(re, (self.du - re * rhs.du) * inv)
    }
}

impl<T: Field> Rem for Dual<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        // a mod b = a - b trunc(a / b); trunc is locally constant
        let q = T::from_f64((self.re / rhs.re).value().trunc());
        Dual::new(self.re - rhs.re * q, self.du - rhs.du * q)
    }
}

impl<T: Field> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

impl<T: Field> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Field> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Field> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Field> DivAssign for Dual<T> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<T: Field> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.du.is_zero()
    }
}

impl<T: Field> One for Dual<T> {
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Field> Num for Dual<T> {
    type FromStrRadixErr = T::FromStrRadixErr;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Dual::constant)
    }
}

impl<T: Field> Field for Dual<T> {
    type Extended = Dual<T::Extended>;

    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }
    fn value(self) -> f64 {
        self.re.value()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::from_f64(0.5) / s)
    }
    fn extend(self) -> Self::Extended {
        Dual::new(self.re.extend(), self.du.extend())
    }
    fn from_extended(x: Self::Extended) -> Self {
        Dual::new(T::from_extended(x.re), T::from_extended(x.du))
    }
}

impl<T: Real> Real for Dual<T> {
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn derivative(f: impl Fn(Dual) -> Dual, x: f64) -> f64 {
        f(Dual::variable(x)).du
    }

    #[test]
    fn elementary_derivatives() {
        let x = 0.7;
        assert!((derivative(|d| d.sqrt(), x) - 0.5 / x.sqrt()).abs() < 1e-15);
        assert!((derivative(|d| d.exp(), x) - x.exp()).abs() < 1e-15);
        assert!((derivative(|d| d.ln(), x) - 1.0 / x).abs() < 1e-15);
        assert!((derivative(|d| d.cosh(), x) - x.sinh()).abs() < 1e-15);
        assert!((derivative(|d| d.sinh(), x) - x.cosh()).abs() < 1e-15);
        assert!((derivative(|d| d.powi(3), x) - 3.0 * x * x).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        // d/dx (x^2 + 1) / x = 1 - 1/x^2
        let x = 1.3;
        let d = derivative(|d| (d * d + Dual::one()) / d, x);
        assert!((d - (1.0 - 1.0 / (x * x))).abs() < 1e-14);
    }

    #[test]
    fn complex_over_dual() {
        // d/dx |1 + i/x|^2 = -2/x^3
        let x = 0.9;
        let d = derivative(|d| Complex::new(Dual::one(), Dual::one() / d).norm_sqr(), x);
        assert!((d + 2.0 / (x * x * x)).abs() < 1e-13);
    }

    #[test]
    fn double_double_recovers_lost_digits() {
        // (1 + 2^-60) - 1 vanishes in f64 but not in double-double
        let tiny = 2f64.powi(-60);
        let x = Dd::from(1.0) + Dd::from(tiny) - Dd::from(1.0);
        assert_eq!(x.value(), tiny);
        assert_eq!(1.0 + tiny - 1.0, 0.0);
    }

    #[test]
    fn double_double_division_and_root() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::one();
        assert!(back.value().abs() < 1e-31);
        let r = Dd::from(2.0).sqrt();
        assert!((r * r - Dd::from(2.0)).value().abs() < 1e-31);
        assert!(Dd::from(-1.0).sqrt().value().is_nan());
        assert!(Dd::new(1.0, 1e-20) > Dd::from(1.0));
    }

    #[test]
    fn double_double_transcendentals() {
        // double-double splits of e and ln 3 from a 50-digit reference
        let e = Dd::one().exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-30);
        let ln3 = Dd::from(3.0).ln();
        assert!((ln3 - Dd::new(1.0986122886681098, -9.071_297_235_001_53e-17)).value().abs() < 1e-30);
        let back = ln3.exp() - Dd::from(3.0);
        assert!(back.value().abs() < 1e-30);
        let c = Dd::from(2.0).cosh();
        let s = Dd::from(2.0).sinh();
        assert!((c * c - s * s - Dd::one()).value().abs() < 1e-29);
        let small = Dd::from(0.1).sinh();
        assert!((small.hi - 0.1f64.sinh()).abs() < 1e-17);
        assert!((Dd::from(-40.0).exp() * Dd::from(40.0).exp() - Dd::one()).value().abs() < 1e-30);
    }

    #[test]
    fn extended_dual_round_trip() {
        let d = Dual::new(1.5, -0.25);
        let e = d.extend();
        assert_eq!(e.re, Dd::from(1.5));
        assert_eq!(Dual::<f64>::from_extended(e * e).du, 2.0 * 1.5 * -0.25);
    }
}
