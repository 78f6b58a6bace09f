//! Exact rational scalars.
//!
//! `BigRational` already keeps the denominator positive and the fraction
//! reduced after every operation, so it is used directly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{usage, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or an integer literal. Decimal points are rejected; see
/// [`parse_inexact`] for floating input.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = match num.parse() {
        Ok(v) => v,
        Err(_) => return usage(format!("not an exact rational: {s:?}")),
    };
    let d: BigInt = match den.parse() {
        Ok(v) => v,
        Err(_) => return usage(format!("not an exact rational: {s:?}")),
    };
    if d.is_zero() {
        return usage(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

/// Parses a terminating decimal such as `"2.5"` or `"-0.125"` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('/') || !s.contains('.') {
        return parse_rational(s);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap();
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return usage(format!("not a decimal number: {s:?}"));
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let n: BigInt = digits.parse().map_err(|_| crate::Error::Usage(format!("not a decimal number: {s:?}")))?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

/// Converts a floating literal to the dyadic rational equal to its `f64`
/// value. Returns that value together with the absolute conversion error
/// relative to the exact decimal meaning of the literal.
pub fn parse_inexact(s: &str) -> Result<(Rational, Rational)> {
    let exact = parse_decimal(s).ok();
    let f: f64 = match s.trim().parse() {
        Ok(v) => v,
        Err(_) => match exact.as_ref() {
            Some(r) => to_f64(r),
            None => return usage(format!("not a number: {s:?}")),
        },
    };
    let dyadic = match Rational::from_float(f) {
        Some(r) => r,
        None => return usage(format!("non-finite value: {s:?}")),
    };
    let err = match exact {
        Some(e) => (e - &dyadic).abs(),
        None => Rational::zero(),
    };
    Ok((dyadic, err))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

/// Exact rational from a finite `f64`.
pub fn from_f64(f: f64) -> Option<Rational> {
    Rational::from_float(f)
}

/// Smallest power of two `2^k >= |r|`, used for root bounds.
pub(crate) fn pow2_ceil(r: &Rational) -> Rational {
    let mut p = Rational::one();
    let a = r.abs();
    while p < a {
        p = &p * rat(2);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), rat(7));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("2.5").unwrap(), ratio(5, 2));
        assert_eq!(parse_decimal("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_decimal("3").unwrap(), rat(3));
    }

    #[test]
    fn inexact_records_error() {
        let (v, e) = parse_inexact("0.5").unwrap();
        assert_eq!(v, ratio(1, 2));
        assert!(e.is_zero());
        let (v, e) = parse_inexact("0.1").unwrap();
        assert_eq!(to_f64(&v), 0.1);
        assert!(e.is_positive());
        assert!(to_f64(&e) < 1e-17);
    }
}
