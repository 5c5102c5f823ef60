//! Numeric backends.
//!
//! Every map is defined with exact rational coefficients. Identities,
//! transfer matrices and enumerations run on [`Rational`]; Monte-Carlo
//! sampling converts the same coefficients to `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Arithmetic needed to evaluate piecewise-affine maps.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` for backends where equality is exact.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// Equality for exact backends, a tight relative tolerance for floats.
    fn same(&self, other: &Self) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn same(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn same(&self, other: &Self) -> bool {
        f64::abs(self - other) <= 1e-12 * f64::abs(*self).max(f64::abs(*other)).max(1.0)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // Huge numerators/denominators: scale both down by the same power of two.
        _ => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Natural log of a positive rational, accurate even when numerator and
/// denominator overflow `f64`.
pub fn ln_rational(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        n.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Parses `"num/den"` or a bare integer. Decimals are rejected so that
/// parameters always cross interfaces exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let parse_int = |s: &str| {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("`{text}` is not a rational of the form num/den")))
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{text}`")));
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

/// Formats as `"num/den"` (always with a denominator).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `coeff · ln(base)` with rational `coeff` and `base > 0`, kept symbolic so
/// that identities between logarithmic quantities can be compared exactly.
/// Normalized to `base ≥ 1`, and to `(0, 1)` when the value vanishes.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct LogMultiple {
    #[serde(with = "text")]
    pub coeff: Rational,
    #[serde(with = "text")]
    pub base: Rational,
}

impl LogMultiple {
    pub fn new(coeff: Rational, base: Rational) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::InvalidParameter(format!("log of non-positive {base}")));
        }
        Ok(Self::normalized(coeff, base))
    }

    fn normalized(coeff: Rational, base: Rational) -> Self {
        if coeff.is_zero() || base.is_one() {
            Self {
                coeff: int(0),
                base: int(1),
            }
        } else if base < int(1) {
            Self {
                coeff: -coeff,
                base: base.recip(),
            }
        } else {
            Self { coeff, base }
        }
    }

    pub fn zero() -> Self {
        Self::normalized(int(0), int(1))
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::normalized(&self.coeff * factor, self.base.clone())
    }

    pub fn value(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            rational_to_f64(&self.coeff) * ln_rational(&self.base)
        }
    }
}

impl std::fmt::Display for LogMultiple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}·ln({})", self.coeff, self.base)
    }
}

/// Serde adapter writing a rational as a `[numerator, denominator]` pair of
/// JSON integers.
pub mod pair {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = r.numer().to_i64();
        let d = r.denom().to_i64();
        match (n, d) {
            (Some(n), Some(d)) => [n, d].serialize(s),
            _ => Err(serde::ser::Error::custom(format!(
                "rational {} does not fit in a 64-bit pair",
                format_rational(r)
            ))),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let [n, den] = <[i64; 2]>::deserialize(d)?;
        if den == 0 {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(ratio(n, den))
    }
}

/// Serde adapter writing a rational as a `"num/den"` string.
pub mod text {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/8").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational(" 6/48 ").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-2/4").unwrap(), ratio(-1, 2));
        assert!(parse_rational("0.125").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&ratio(2, 6)), "1/3");
        assert_eq!(format_rational(&int(1)), "1/1");
    }

    #[test]
    fn logs_of_huge_rationals() {
        let big = Rational::new(BigInt::from(3).pow(2000), BigInt::from(2).pow(3000));
        let expected = 2000.0 * 3f64.ln() - 3000.0 * 2f64.ln();
        assert!((ln_rational(&big) - expected).abs() < 1e-9 * expected.abs());
        assert!((rational_to_f64(&ratio(1, 3)) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn pair_serde_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct W(#[serde(with = "pair")] Rational);
        let json = serde_json::to_string(&W(ratio(-3, 8))).unwrap();
        assert_eq!(json, "[-3,8]");
        let back: W = serde_json::from_str(&json).unwrap();
        assert_eq!(back.0, ratio(-3, 8));
        assert!(serde_json::from_str::<W>("[1,0]").is_err());
    }

    #[test]
    fn log_multiples_normalize() {
        let a = LogMultiple::new(ratio(1, 3), ratio(2, 3)).unwrap();
        let b = LogMultiple::new(ratio(-1, 3), ratio(3, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(LogMultiple::new(int(5), int(1)).unwrap(), LogMultiple::zero());
        assert!((b.value() + (1.5f64).ln() / 3.0).abs() < 1e-15);
        assert!(LogMultiple::new(int(1), int(0)).is_err());
    }
}
