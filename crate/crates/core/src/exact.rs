//! Exact rational helpers.
//!
//! Frequencies, thresholds and payoff-table entries are carried as
//! [`BigRational`] so that conditions such as "frequency equals one" or
//! "frequency exceeds one half" are decided without rounding. Floating point
//! only appears at API boundaries, where [`snap`] maps a float to the simplest
//! nearby rational.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// Tolerance used when reading decimal literals as rationals.
pub const LITERAL_TOLERANCE: f64 = 1e-12;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Simplest continued-fraction convergent within `tol` of `x`.
///
/// Returns `None` for non-finite input.
pub fn snap(x: f64, tol: f64) -> Option<Rational> {
    let target = Rational::from_float(x)?;
    let tol = Rational::from_float(tol.abs())?;
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = target.clone();
    for _ in 0..96 {
        let a = rem.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        let cand = Rational::new(h2.clone(), k2.clone());
        if (&cand - &target).abs() <= tol {
            return Some(cand);
        }
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Some(cand);
        }
        rem = frac.recip();
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    Some(target)
}

/// Parses `"p/q"`, `"p"`, or a decimal literal.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = text.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    let f: f64 = text.parse().ok()?;
    if !f.is_finite() {
        return None;
    }
    snap(f, LITERAL_TOLERANCE)
}

/// `"p/q"` for non-integers, `"p"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A number as written in a spec file: a JSON number or an exact `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumLit {
    Float(f64),
    Text(String),
}

impl NumLit {
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            NumLit::Float(f) if f.is_finite() => snap(*f, LITERAL_TOLERANCE),
            NumLit::Float(_) => None,
            NumLit::Text(s) => parse_rational(s),
        }
    }

    pub fn exact(r: &Rational) -> Self {
        if r.is_integer() {
            if let Some(v) = r.to_f64() {
                return NumLit::Float(v);
            }
        }
        NumLit::Text(format_rational(r))
    }
}

impl From<f64> for NumLit {
    fn from(v: f64) -> Self {
        NumLit::Float(v)
    }
}

impl fmt::Display for NumLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumLit::Float(v) => write!(f, "{v}"),
            NumLit::Text(s) => f.write_str(s),
        }
    }
}

/// Exact value alongside its float rendering, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub value: f64,
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        ExactValue {
            exact: format_rational(r),
            value: to_f64(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_recovers_simple_fractions() {
        assert_eq!(snap(0.5, 1e-12).unwrap(), rat(1, 2));
        assert_eq!(snap(1.0 / 3.0, 1e-12).unwrap(), rat(1, 3));
        assert_eq!(snap(0.4, 1e-12).unwrap(), rat(2, 5));
        assert_eq!(snap(0.5 - 0.1, 1e-12).unwrap(), rat(2, 5));
        assert_eq!(snap(-1.0, 1e-12).unwrap(), int(-1));
        assert_eq!(snap(4.0, 1e-12).unwrap(), int(4));
        assert!(snap(f64::NAN, 1e-12).is_none());
    }

    #[test]
    fn parses_fraction_text() {
        assert_eq!(parse_rational("341/1024").unwrap(), rat(341, 1024));
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn format_round_trips() {
        for r in [rat(2, 3), int(7), rat(-5, 4)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
