//! Arbitrary-precision rationals and the conversions used at the float boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

/// `p/q` as an exact rational. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn from_usize(p: usize) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn to_f64(r: &Rational) -> f64 {
    // Convert through a scaled quotient so huge numerators and denominators
    // do not overflow individually.
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
    let scale: i64 = 60 - shift;
    let scaled = if scale >= 0 {
        (r.numer() << scale as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-scale) as usize)
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-scale as i32)
}

/// Exact rational value of a finite float (every finite double is dyadic).
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// Parse `"p/q"`, an integer, or a decimal such as `"2.5"` or `"1e-3"`.
///
/// Decimals are converted exactly from their decimal digits, not through a
/// binary double. The second component is `true` when the input was decimal.
pub fn parse_rational(s: &str) -> Result<(Rational, bool)> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse(s.to_string()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        if q.is_zero() {
            return Err(Error::Parse(s.to_string()));
        }
        return Ok((Rational::new(p, q), false));
    }
    if let Ok(i) = t.parse::<BigInt>() {
        return Ok((Rational::from_integer(i), false));
    }
    parse_decimal(t)
        .map(|r| (r, true))
        .ok_or_else(|| Error::Parse(s.to_string()))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let exp10 = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(numer);
    if exp10 >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, exp10 as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-exp10) as usize));
    }
    Some(if neg { -r } else { r })
}

/// `Some(m)` when `r` is the integer `-m` with `m >= 0`.
pub fn as_nonpositive_integer(r: &Rational) -> Option<usize> {
    if r.is_integer() && !r.is_positive() {
        (-r.to_integer()).to_usize()
    } else {
        None
    }
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .map(|v| v.abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}
