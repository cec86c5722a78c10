//! Lebesgue exponents in `[1, ∞]` with exact arithmetic on simple rationals.
//!
//! Exponents are stored through their reciprocal `1/p`, so `p = ∞` is the
//! reciprocal zero and Hölder partners (`1/q = 1/p + 1/r`) and conjugates
//! (`1/p + 1/p* = 1`) are plain subtraction. Decimal strings such as `"1.5"`
//! parse to exact rationals; only values that arrive as floats and do not
//! match a small rational fall back to an approximate slot.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Reciprocal of a finite exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reciprocal {
    Exact(Ratio<i64>),
    Approx(f64),
}

impl Reciprocal {
    fn as_f64(self) -> f64 {
        match self {
            Reciprocal::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Reciprocal::Approx(x) => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(Reciprocal),
    Infinity,
}

const MAX_DENOM: i64 = 64;

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(Reciprocal::Exact(Ratio::new_raw(1, 1)));
    pub const TWO: Exponent = Exponent::Finite(Reciprocal::Exact(Ratio::new_raw(1, 2)));

    /// `p = num / den`.
    pub fn rational(num: i64, den: i64) -> Result<Self, Error> {
        if num <= 0 || den <= 0 {
            return Err(Error::BadExponent(format!("{num}/{den}")));
        }
        Ok(Self::from_recip_ratio(Ratio::new(den, num)))
    }

    pub fn from_f64(p: f64) -> Result<Self, Error> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::BadExponent(p.to_string()));
        }
        if p.is_infinite() {
            return Ok(Exponent::Infinity);
        }
        for den in 1..=MAX_DENOM {
            let num = (p * den as f64).round();
            if (1.0..1e9).contains(&num) && (num / den as f64 - p).abs() <= 1e-12 * p {
                return Self::rational(num as i64, den);
            }
        }
        Ok(Exponent::Finite(Reciprocal::Approx(1.0 / p)))
    }

    fn from_recip_ratio(r: Ratio<i64>) -> Self {
        if r == Ratio::from_integer(0) {
            Exponent::Infinity
        } else {
            Exponent::Finite(Reciprocal::Exact(r))
        }
    }

    fn from_recip(r: Reciprocal) -> Self {
        match r {
            Reciprocal::Exact(q) => Self::from_recip_ratio(q),
            Reciprocal::Approx(0.0) => Exponent::Infinity,
            other => Exponent::Finite(other),
        }
    }

    fn recip_slot(self) -> Reciprocal {
        match self {
            Exponent::Finite(r) => r,
            Exponent::Infinity => Reciprocal::Exact(Ratio::from_integer(0)),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn recip(self) -> f64 {
        self.recip_slot().as_f64()
    }

    /// `p` as a float; `f64::INFINITY` for `p = ∞`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Infinity => f64::INFINITY,
            Exponent::Finite(r) => 1.0 / r.as_f64(),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn is_exact(self) -> bool {
        matches!(self.recip_slot(), Reciprocal::Exact(_))
    }

    /// True for exponents in `[1, ∞]`.
    pub fn is_norm_exponent(self) -> bool {
        match self.recip_slot() {
            Reciprocal::Exact(r) => r <= Ratio::from_integer(1),
            Reciprocal::Approx(x) => x <= 1.0 + 1e-15,
        }
    }

    pub fn check_norm_exponent(self) -> Result<Self, Error> {
        if self.is_norm_exponent() {
            Ok(self)
        } else {
            Err(Error::BadExponent(self.to_string()))
        }
    }

    fn sub_recip(a: Reciprocal, b: Reciprocal) -> Reciprocal {
        match (a, b) {
            (Reciprocal::Exact(x), Reciprocal::Exact(y)) => Reciprocal::Exact(x - y),
            (x, y) => Reciprocal::Approx(x.as_f64() - y.as_f64()),
        }
    }

    /// Conjugate exponent `p*` with `1/p + 1/p* = 1`.
    pub fn conjugate(self) -> Self {
        Self::from_recip(Self::sub_recip(Reciprocal::Exact(Ratio::from_integer(1)), self.recip_slot()))
    }

    /// The `r` with `1/q = 1/p + 1/r`, requiring `q ≤ p`. `p = q` gives `r = ∞` exactly.
    pub fn holder_complement(p: Exponent, q: Exponent) -> Result<Exponent, Error> {
        if p.cmp_exp(q) == Ordering::Less {
            return Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() });
        }
        let d = Self::sub_recip(q.recip_slot(), p.recip_slot());
        let d = match d {
            Reciprocal::Approx(x) if x.abs() < 1e-14 => Reciprocal::Approx(0.0),
            other => other,
        };
        Ok(Self::from_recip(d))
    }

    /// `r = p/(p−q)`, the integrability exponent of the Radon–Nikodym
    /// derivative for a composition operator `L^p → L^q`; `∞` when `p = q`.
    pub fn ratio_complement(p: Exponent, q: Exponent) -> Result<Exponent, Error> {
        if p.cmp_exp(q) == Ordering::Less {
            return Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() });
        }
        // 1/r = 1 - (1/p)/(1/q)
        match (p.recip_slot(), q.recip_slot()) {
            (_, Reciprocal::Exact(rq)) if rq == Ratio::from_integer(0) => Ok(Exponent::Infinity),
            (Reciprocal::Exact(rp), Reciprocal::Exact(rq)) => {
                Ok(Self::from_recip_ratio(Ratio::from_integer(1) - rp / rq))
            }
            (a, b) => {
                let x = 1.0 - a.as_f64() / b.as_f64();
                Ok(Self::from_recip(Reciprocal::Approx(if x.abs() < 1e-14 { 0.0 } else { x })))
            }
        }
    }

    /// `p / q` as an exact ratio when both are exact and finite.
    pub fn exact_quotient(p: Exponent, q: Exponent) -> Option<Ratio<i64>> {
        match (p.recip_slot(), q.recip_slot()) {
            (Reciprocal::Exact(rp), Reciprocal::Exact(rq)) if rp != Ratio::from_integer(0) => {
                Some(rq / rp)
            }
            _ => None,
        }
    }

    /// Multiplies `p` by a positive rational.
    pub fn scaled(self, factor: Ratio<i64>) -> Self {
        match self.recip_slot() {
            Reciprocal::Exact(r) => Self::from_recip_ratio(r / factor),
            Reciprocal::Approx(x) => {
                Self::from_recip(Reciprocal::Approx(x * *factor.denom() as f64 / *factor.numer() as f64))
            }
        }
    }

    /// Ordering of `p` values (`∞` is the largest).
    pub fn cmp_exp(self, other: Exponent) -> Ordering {
        match (self.recip_slot(), other.recip_slot()) {
            (Reciprocal::Exact(a), Reciprocal::Exact(b)) => b.cmp(&a),
            (a, b) => b.as_f64().partial_cmp(&a.as_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_exp(*other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(Reciprocal::Approx(x)) => write!(f, "{}", 1.0 / x),
            Exponent::Finite(Reciprocal::Exact(r)) => {
                let p = r.recip();
                let (n, d) = (*p.numer(), *p.denom());
                if d == 1 {
                    return write!(f, "{n}");
                }
                // terminating decimals print as decimals, the rest as fractions
                let mut dd = d;
                while dd % 2 == 0 {
                    dd /= 2;
                }
                while dd % 5 == 0 {
                    dd /= 5;
                }
                if dd == 1 {
                    write!(f, "{}", n as f64 / d as f64)
                } else {
                    write!(f, "{n}/{d}")
                }
            }
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let bad = || Error::BadExponent(s.to_string());
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinity),
            _ => {}
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Self::rational(n, d).map_err(|_| bad());
        }
        let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
        let digits_ok = |x: &str| x.chars().all(|c| c.is_ascii_digit());
        if int_part.is_empty() && frac_part.is_empty()
            || !digits_ok(int_part)
            || !digits_ok(frac_part)
            || frac_part.len() > 9
        {
            return Err(bad());
        }
        let scale = 10i64.pow(frac_part.len() as u32);
        let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        let num = int.checked_mul(scale).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        Self::rational(num, scale).map_err(|_| bad())
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(e("1.5"), Exponent::rational(3, 2).unwrap());
        assert_eq!(e("2"), Exponent::TWO);
        assert_eq!(e("inf"), Exponent::Infinity);
        assert_eq!(e("4/3"), Exponent::rational(4, 3).unwrap());
        assert!(e("1.5").is_exact());
        assert!("abc".parse::<Exponent>().is_err());
        assert!("-2".parse::<Exponent>().is_err());
        assert!("".parse::<Exponent>().is_err());
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::ONE.conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::ONE);
        assert_eq!(Exponent::TWO.conjugate(), Exponent::TWO);
        assert_eq!(e("3").conjugate(), e("1.5"));
    }

    #[test]
    fn holder_partner_is_exact() {
        assert_eq!(Exponent::holder_complement(e("2"), e("1")).unwrap(), e("2"));
        assert_eq!(Exponent::holder_complement(e("3"), e("1.5")).unwrap(), e("3"));
        assert_eq!(Exponent::holder_complement(e("2.5"), e("2.5")).unwrap(), Exponent::Infinity);
        assert_eq!(Exponent::holder_complement(Exponent::Infinity, e("2")).unwrap(), e("2"));
        assert!(Exponent::holder_complement(e("1"), e("2")).is_err());
    }

    #[test]
    fn ratio_complement_matches_p_over_p_minus_q() {
        assert_eq!(Exponent::ratio_complement(e("2"), e("1")).unwrap(), e("2"));
        assert_eq!(Exponent::ratio_complement(e("3"), e("2")).unwrap(), e("3"));
        assert_eq!(Exponent::ratio_complement(e("2"), e("2")).unwrap(), Exponent::Infinity);
        assert_eq!(Exponent::ratio_complement(Exponent::Infinity, e("2")).unwrap(), e("1"));
        assert_eq!(
            Exponent::ratio_complement(Exponent::Infinity, Exponent::Infinity).unwrap(),
            Exponent::Infinity
        );
    }

    #[test]
    fn float_inputs_snap_to_rationals() {
        assert_eq!(Exponent::from_f64(1.5).unwrap(), e("1.5"));
        assert_eq!(Exponent::from_f64(f64::INFINITY).unwrap(), Exponent::Infinity);
        assert!(!Exponent::from_f64(std::f64::consts::PI).unwrap().is_exact());
        assert!(Exponent::from_f64(0.5).unwrap().check_norm_exponent().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["1", "1.5", "2", "4/3", "inf", "2.25"] {
            assert_eq!(e(s).to_string(), s);
        }
    }
}
