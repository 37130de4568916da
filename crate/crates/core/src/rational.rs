//! Exact rational scalars and their text form.
//!
//! Every number in this crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. The text
//! form is `"num/den"` or `"int"` (optional leading sign), which is what
//! every file written by the CLI uses.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `[+-]digits[/digits]`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |part: &str| -> Result<BigInt, ParseRationalError> {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Malformed(s.to_string()));
        }
        BigInt::from_str(part).map_err(|_| ParseRationalError::Malformed(s.to_string()))
    };
    let mut numer = digits(num)?;
    if negative {
        numer = -numer;
    }
    let denom = match den {
        Some(d) => digits(d)?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Sign as -1, 0 or 1.
pub fn sign(value: &Rational) -> i8 {
    if value.is_positive() {
        1
    } else if value.is_negative() {
        -1
    } else {
        0
    }
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Rescales a nonzero vector to the primitive integer vector on the same ray.
///
/// Clears denominators and divides out the gcd of the entries; the sign of
/// every entry is kept. A zero vector is returned unchanged.
pub fn primitive_integer_ray(values: &[Rational]) -> Vec<Rational> {
    let l = lcm_of_denominators(values);
    let scaled: Vec<BigInt> = values
        .iter()
        .map(|v| (v * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return values.to_vec();
    }
    scaled
        .into_iter()
        .map(|v| Rational::from_integer(v / &g))
        .collect()
}

/// Wrapper that prints a slice of rationals as `(a, b, c)`.
pub struct DisplayVec<'a>(pub &'a [Rational]);

impl fmt::Display for DisplayVec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Serde adapters that store rationals and big integers as exact strings.
pub mod serde_exact {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub mod rational {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
            value.to_string().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
            let text = String::deserialize(d)?;
            parse_rational(&text).map_err(D::Error::custom)
        }
    }

    pub mod rational_vec {
        use super::*;

        pub fn serialize<S: Serializer>(value: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<String> = value.iter().map(ToString::to_string).collect();
            text.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let text = Vec::<String>::deserialize(d)?;
            text.iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod rational_rows {
        use super::*;

        pub fn serialize<S: Serializer>(value: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<Vec<String>> = value
                .iter()
                .map(|row| row.iter().map(ToString::to_string).collect())
                .collect();
            text.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let text = Vec::<Vec<String>>::deserialize(d)?;
            text.iter()
                .map(|row| {
                    row.iter()
                        .map(|t| parse_rational(t).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod bigint {
        use super::*;

        pub fn serialize<S: Serializer>(value: &BigInt, s: S) -> Result<S::Ok, S::Error> {
            value.to_string().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
            let text = String::deserialize(d)?;
            let r = parse_rational(&text).map_err(D::Error::custom)?;
            if !r.is_integer() {
                return Err(D::Error::custom(format!("expected an integer, got `{text}`")));
            }
            Ok(r.to_integer())
        }
    }

    pub mod bigint_vec {
        use super::*;

        pub fn serialize<S: Serializer>(value: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<String> = value.iter().map(ToString::to_string).collect();
            text.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            let text = Vec::<String>::deserialize(d)?;
            text.iter()
                .map(|t| {
                    let r = parse_rational(t).map_err(D::Error::custom)?;
                    if !r.is_integer() {
                        return Err(D::Error::custom(format!("expected an integer, got `{t}`")));
                    }
                    Ok(r.to_integer())
                })
                .collect()
        }
    }
}
