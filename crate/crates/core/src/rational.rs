//! Exact rational arithmetic shared by every metric.

use alloc::string::String;
use core::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Renders as `p/q`, or `p` when the denominator is one.
pub fn to_pq(r: &Rational) -> String {
    let mut s = String::new();
    if r.denom().is_one() {
        let _ = write!(s, "{}", r.numer());
    } else {
        let _ = write!(s, "{}/{}", r.numer(), r.denom());
    }
    s
}

/// Parses `p/q` or a plain integer.
pub fn parse_pq(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

/// Exact conversion of a finite `f64` into a rational; `None` for NaN or infinity.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Clamp into `[0, 1]`.
pub fn clamp_unit(r: Rational) -> Rational {
    if r.is_negative() {
        zero()
    } else if r > one() {
        one()
    } else {
        r
    }
}

pub fn in_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= one()
}

pub fn mean<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Option<Rational> {
    let mut sum = zero();
    let mut n = 0i64;
    for x in items {
        sum += x;
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / int(n))
    }
}
