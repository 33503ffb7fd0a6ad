//! Exact rational scalars.
//!
//! Channel gains, transmit coefficients, cache fractions and every derived
//! metric live in this type so cancellation can be checked as equality with
//! zero instead of a small-magnitude threshold.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};

/// Rational number kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactScalar(BigRational);

impl ExactScalar {
    /// `numer / denom`; a zero denominator is rejected.
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(CoreError::ZeroInverse);
        }
        Ok(Self(BigRational::new(numer.into(), denom.into())))
    }

    /// Panicking twin of [`ExactScalar::new`] for literal constants.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn from_integer<T: Into<BigInt>>(value: T) -> Self {
        Self(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(CoreError::ZeroInverse);
        }
        Ok(Self(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc *= self;
        }
        acc
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer value as `u64`, if the scalar is a non-negative integer small
    /// enough to fit.
    pub fn to_u64(&self) -> Option<u64> {
        if !self.is_integer() {
            return None;
        }
        self.numer().to_u64()
    }

    /// `1/n` for a positive integer `n`, otherwise `None`.
    pub fn unit_fraction_denominator(&self) -> Option<u64> {
        if self.numer().is_one() && self.denom().is_positive() {
            self.denom().to_u64()
        } else {
            None
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let v = self.to_f64();
        if v == 0.0 {
            return "0".to_string();
        }
        let magnitude = v.abs().log10().floor() as i64;
        let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for ExactScalar {
    fn from(v: i64) -> Self {
        Self::from_integer(v)
    }
}

impl From<usize> for ExactScalar {
    fn from(v: usize) -> Self {
        Self::from_integer(v)
    }
}

impl From<u64> for ExactScalar {
    fn from(v: u64) -> Self {
        Self::from_integer(v)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"p/q"`, an integer, or a finite decimal such as `"0.035"`
/// (converted exactly).
impl FromStr for ExactScalar {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoreError::ParseScalar(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Ok(Self(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
                "" => BigInt::zero(),
                digits => digits.parse().map_err(|_| bad())?,
            };
            let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let magnitude = BigRational::new(int_part * &scale + frac_part, scale);
            return Ok(Self(if negative { -magnitude } else { magnitude }));
        }
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Self(BigRational::from_integer(n)))
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar(self.0.$method(rhs.0))
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar(self.0.$method(&rhs.0))
            }
        }
        impl $trait<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division by zero panics, as for the primitive types; use `checked_div`
// where the divisor is not known to be nonzero.
impl Div<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Div<ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        &self / &rhs
    }
}

impl Div<&ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        &self / rhs
    }
}

impl Div<ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        self / &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-&self.0)
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        self.0 *= &rhs.0;
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, v| acc + v)
    }
}

impl Product for ExactScalar {
    fn product<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, v| acc * v)
    }
}

impl<'a> Product<&'a ExactScalar> for ExactScalar {
    fn product<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, v| acc * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let v = q(6, -4);
        assert_eq!(v.numer(), &BigInt::from(-3));
        assert_eq!(v.denom(), &BigInt::from(2));
        assert_eq!(v.to_string(), "-3/2");
    }

    #[test]
    fn invert_rejects_zero() {
        assert_eq!(ExactScalar::zero().inv(), Err(CoreError::ZeroInverse));
        assert_eq!(q(-2, 7).inv().unwrap(), q(-7, 2));
        assert!(ExactScalar::new(1, 0).is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1/5".parse::<ExactScalar>().unwrap(), q(1, 5));
        assert_eq!(" 3 ".parse::<ExactScalar>().unwrap(), q(3, 1));
        assert_eq!("0.1".parse::<ExactScalar>().unwrap(), q(1, 10));
        assert_eq!("0.035".parse::<ExactScalar>().unwrap(), q(7, 200));
        assert_eq!("-1.5".parse::<ExactScalar>().unwrap(), q(-3, 2));
        assert!("1/0".parse::<ExactScalar>().is_err());
        assert!("abc".parse::<ExactScalar>().is_err());
        assert!("1.".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(q(27, 28).to_decimal(12), "0.964285714286");
        assert_eq!(q(1, 1).to_decimal(12), "1.00000000000");
        assert_eq!(q(0, 1).to_decimal(12), "0");
    }

    #[test]
    fn unit_fraction() {
        assert_eq!(q(1, 5).unit_fraction_denominator(), Some(5));
        assert_eq!(q(2, 7).unit_fraction_denominator(), None);
        assert_eq!(q(1, 1).unit_fraction_denominator(), Some(1));
    }

    #[test]
    fn cancellation_is_exact_zero() {
        let h01 = q(13, 7);
        let h12 = q(-5, 991);
        let a = -(&h12);
        let b = &h12 * &ExactScalar::one();
        assert!((a + b).is_zero());
        let chain: ExactScalar = [h01.clone(), h12.clone()].iter().product();
        assert_eq!(chain, &h01 * &h12);
    }
}
