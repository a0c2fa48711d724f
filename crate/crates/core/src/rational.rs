//! Exact rational helpers shared by every module.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// The exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Exact square root when `r` is the square of a rational.
pub fn sqrt_exact(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Rational::zero());
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

/// `√r` rounded down to a multiple of `2^-bits` (after clearing `r`'s
/// denominator); `None` for negative `r`.
pub fn sqrt_approx(r: &Rational, bits: u32) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let d = r.denom();
    // √(n/d) = √(n·d) / d
    let scaled: BigInt = (r.numer() * d) << (2 * bits as usize);
    let root = scaled.sqrt();
    Some(Rational::new(root, d << bits as usize))
}

/// `num/den` form, always with an explicit denominator.
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Shortest text form: `n` for integers, `n/d` otherwise.
pub fn to_short_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Accepts `n`, `n/d` and finite decimals such as `-0.125` (converted exactly).
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let s = s.trim();
    let err = || RationalParseError(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, fracpart)) = s.split_once('.') {
        let (neg, whole) = match whole.strip_prefix('-') {
            Some(w) => (true, w),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if fracpart.is_empty() && whole.is_empty() {
            return Err(err());
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !fracpart.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{whole}{fracpart}");
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        let d = BigInt::from(10u32).pow(fracpart.len() as u32);
        let n = if neg { -n } else { n };
        return Ok(Rational::new(n, d));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| err())
}

pub fn sign(r: &Rational) -> Sign {
    if r.is_zero() {
        Sign::NoSign
    } else if r.is_positive() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Serde adapter storing a rational as a `"num/den"` string.
pub mod serde_fraction {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_fraction_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_fraction_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&to_fraction_string(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}
