//! Exact rational scalars for the space calculus and the planner.
//!
//! Every finite `f64` is a dyadic rational and converts without loss, so
//! plan parameters derived from rational inputs stay exact end to end and
//! strictness checks never hinge on floating-point noise.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom` in lowest terms. Panics if `denom == 0`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Exact conversion; `None` for NaN or infinities.
    pub fn from_f64(value: f64) -> Option<Self> {
        BigRational::from_float(value).map(Rational)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

macro_rules! forward_binop {
    ($imp:ident, $method:ident) => {
        impl $imp for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $imp<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $imp<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $imp<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::integer(i64::from(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse error for textual rationals.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"n"`, `"n/d"`, and exact decimal literals such as `"0.249"`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let fail = |reason| ParseRationalError {
            literal: text.to_owned(),
            reason,
        };
        let trimmed = text.trim();
        if let Some((numer, denom)) = trimmed.split_once('/') {
            let n = BigInt::from_str(numer.trim()).map_err(|_| fail("bad numerator"))?;
            let d = BigInt::from_str(denom.trim()).map_err(|_| fail("bad denominator"))?;
            if d.is_zero() {
                return Err(fail("zero denominator"));
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        if let Some((int_part, frac_part)) = trimmed.split_once('.') {
            let negative = int_part.trim_start().starts_with('-');
            let int = if int_part.is_empty() || int_part == "-" {
                BigInt::zero()
            } else {
                BigInt::from_str(int_part).map_err(|_| fail("bad integer part"))?
            };
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("bad fractional part"));
            }
            let frac = BigInt::from_str(frac_part).map_err(|_| fail("bad fractional part"))?;
            let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
            let numer = int * &scale + if negative { -frac } else { frac };
            return Ok(Rational(BigRational::new(numer, scale)));
        }
        let n = BigInt::from_str(trimmed).map_err(|_| fail("bad integer"))?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.denom().is_one() {
            if let Some(n) = self.0.numer().to_i64() {
                return serializer.serialize_i64(n);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or a rational literal such as \"3/2\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        Rational::from_f64(v).ok_or_else(|| E::custom("non-finite number"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_float_conversion() {
        let x = Rational::from_f64(0.375).unwrap();
        assert_eq!(x, Rational::ratio(3, 8));
        assert_eq!(x.to_f64(), 0.375);
        assert!(Rational::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn arithmetic_and_ordering() {
        let a = Rational::ratio(3, 2);
        let b = Rational::ratio(1, 3);
        assert_eq!(&a + &b, Rational::ratio(11, 6));
        assert_eq!(&a * &b, Rational::ratio(1, 2));
        assert_eq!(&a - &b, Rational::ratio(7, 6));
        assert_eq!(&a / &b, Rational::ratio(9, 2));
        assert!(b < a);
        assert_eq!(a.recip(), Rational::ratio(2, 3));
    }

    #[test]
    fn parsing_literals() {
        assert_eq!("3/2".parse::<Rational>().unwrap(), Rational::ratio(3, 2));
        assert_eq!("-7".parse::<Rational>().unwrap(), Rational::integer(-7));
        assert_eq!(
            "0.249".parse::<Rational>().unwrap(),
            Rational::ratio(249, 1000)
        );
        assert_eq!(
            "-1.5".parse::<Rational>().unwrap(),
            Rational::ratio(-3, 2)
        );
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let x = Rational::ratio(-12, 17);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "\"-12/17\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);

        let from_number: Rational = serde_json::from_str("2").unwrap();
        assert_eq!(from_number, Rational::integer(2));
        let from_float: Rational = serde_json::from_str("0.25").unwrap();
        assert_eq!(from_float, Rational::ratio(1, 4));
    }
}
