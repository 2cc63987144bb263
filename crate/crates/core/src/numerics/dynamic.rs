//! Mode-tagged scalars used at the serialization and CLI boundary.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::bigfloat::BigFloat;
use super::real::rational_to_f64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarMode {
    Exact,
    #[serde(rename = "bigfloat")]
    BigFloat,
    #[serde(rename = "float")]
    Machine,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::BigFloat => "bigfloat",
            ScalarMode::Machine => "float",
        }
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "rational" => Ok(ScalarMode::Exact),
            "bigfloat" | "big" => Ok(ScalarMode::BigFloat),
            "float" | "machine" => Ok(ScalarMode::Machine),
            other => Err(Error::Parse(format!("unknown scalar mode `{other}`"))),
        }
    }
}

/// A scalar carrying its arithmetic mode.
///
/// Arithmetic between two different modes is refused with
/// [`Error::ModeMismatch`].
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Big(BigFloat),
    Machine(f64),
}

impl Scalar {
    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Exact(_) => ScalarMode::Exact,
            Scalar::Big(_) => ScalarMode::BigFloat,
            Scalar::Machine(_) => ScalarMode::Machine,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Big(b) => b.to_f64(),
            Scalar::Machine(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            _ => None,
        }
    }

    fn combine(
        &self,
        other: &Scalar,
        op: &'static str,
        exact: impl FnOnce(&BigRational, &BigRational) -> Option<BigRational>,
        big: impl FnOnce(BigFloat, BigFloat) -> BigFloat,
        machine: impl FnOnce(f64, f64) -> f64,
    ) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => exact(a, b)
                .map(Scalar::Exact)
                .ok_or_else(|| Error::Domain(format!("exact {op} by zero"))),
            (Scalar::Big(a), Scalar::Big(b)) => Ok(Scalar::Big(big(a.clone(), b.clone()))),
            (Scalar::Machine(a), Scalar::Machine(b)) => Ok(Scalar::Machine(machine(*a, *b))),
            (a, b) => Err(Error::ModeMismatch { op, left: a.mode(), right: b.mode() }),
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, "add", |a, b| Some(a + b), |a, b| a + b, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, "sub", |a, b| Some(a - b), |a, b| a - b, |a, b| a - b)
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, "mul", |a, b| Some(a * b), |a, b| a * b, |a, b| a * b)
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(
            other,
            "div",
            |a, b| if b.is_zero() { None } else { Some(a / b) },
            |a, b| a / b,
            |a, b| a / b,
        )
    }

    /// Fixed-point decimal rendering with `digits` fractional digits.
    /// Exact values are rounded half away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(r) => rational_to_decimal(r, digits),
            Scalar::Big(b) => format_f64_or_big(b, digits),
            Scalar::Machine(x) => format!("{:.*}", digits, x),
        }
    }
}

fn format_f64_or_big(b: &BigFloat, digits: usize) -> String {
    // Route through an exact rational built from the full decimal expansion.
    match parse_rational(&b.to_decimal_string()) {
        Ok(r) => rational_to_decimal(&r, digits),
        Err(_) => b.to_decimal_string(),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", rational_string(r)),
            Scalar::Big(b) => write!(f, "{}@{}", b.to_decimal_string(), b.precision()),
            Scalar::Machine(x) => write!(f, "{x:?}"),
        }
    }
}

/// Rationals always render as `numerator/denominator`, integers included.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => s.serialize_str(&rational_string(r)),
            Scalar::Big(b) => {
                use serde::ser::SerializeStruct;
                let mut st = s.serialize_struct("BigFloat", 2)?;
                st.serialize_field("decimal", &b.to_decimal_string())?;
                st.serialize_field("precision_bits", &b.precision())?;
                st.end()
            }
            Scalar::Machine(x) => {
                if x.is_finite() {
                    s.serialize_f64(*x)
                } else {
                    s.serialize_str(&format!("{x}"))
                }
            }
        }
    }
}

/// Parses `p/q`, integers, and finite decimals such as `-1.25e-3`, all exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(10.into());
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Decimal expansion of `r` rounded half away from zero to `digits` places.
pub fn rational_to_decimal(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let twice = rem * 2;
    let rounded = if &twice >= scaled.denom() { q + BigInt::one() } else { q };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_all_rational_spellings() {
        assert_eq!(parse_rational("7/2").unwrap(), q(7, 2));
        assert_eq!(parse_rational("-3").unwrap(), q(-3, 1));
        assert_eq!(parse_rational("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("3E2").unwrap(), q(300, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn decimal_rendering_rounds_half_away_from_zero() {
        assert_eq!(rational_to_decimal(&q(1, 6), 4), "0.1667");
        assert_eq!(rational_to_decimal(&q(-1, 8), 2), "-0.13");
        assert_eq!(rational_to_decimal(&q(5, 2), 0), "3");
        assert_eq!(rational_to_decimal(&q(1, 3), 3), "0.333");
    }

    #[test]
    fn mixing_modes_is_rejected() {
        let a = Scalar::Exact(q(1, 2));
        let b = Scalar::Machine(0.5);
        assert!(matches!(a.checked_add(&b), Err(Error::ModeMismatch { .. })));
        assert_eq!(a.checked_add(&a).unwrap(), Scalar::Exact(q(1, 1)));
        assert!(a.checked_div(&Scalar::Exact(q(0, 1))).is_err());
    }

    #[test]
    fn serialization_formats() {
        let s = serde_json::to_string(&Scalar::Exact(q(1, 2))).unwrap();
        assert_eq!(s, "\"1/2\"");
        let s = serde_json::to_string(&Scalar::Exact(q(2, 1))).unwrap();
        assert_eq!(s, "\"2/1\"");
        let b = Scalar::Big(BigFloat::from_f64(0.5, 128));
        let v: serde_json::Value = serde_json::to_value(&b).unwrap();
        assert_eq!(v["precision_bits"], 128);
        assert!(v["decimal"].as_str().unwrap().contains('5'));
    }
}
