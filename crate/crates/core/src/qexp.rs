//! Exact bookkeeping of powers of q.
//!
//! Absolute values on F_q((x⁻¹)) live in `q^Z ∪ {0}` and are stored by exponent.
//! Quantities such as `|u|^{1/d}` carry rational exponents; comparisons with a
//! rational `ε` are decided by integer cross-multiplication (`q^{n/m} < ε ⇔ q^n < ε^m`).
//! Sums of irrational powers are handled by [`Enclosure`], a certified rational interval.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rational exponent of q.
pub type QExp = Ratio<i64>;

/// An element of `q^Z ∪ {0}` (absolute value), ordered with 0 below every power.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QNorm(Option<i64>);

impl QNorm {
    pub const ZERO: QNorm = QNorm(None);
    pub const ONE: QNorm = QNorm(Some(0));

    pub fn pow(e: i64) -> Self {
        QNorm(Some(e))
    }
    pub fn from_opt(e: Option<i64>) -> Self {
        QNorm(e)
    }
    pub fn exp(self) -> Option<i64> {
        self.0
    }
    pub fn is_zero(self) -> bool {
        self.0.is_none()
    }
    /// Exponent, panicking on zero; for values known to be nonzero.
    pub fn exp_nonzero(self) -> i64 {
        self.0.expect("nonzero absolute value")
    }
    pub fn mul(self, o: QNorm) -> QNorm {
        QNorm(self.0.zip(o.0).map(|(a, b)| a + b))
    }
    pub fn mul_pow(self, e: i64) -> QNorm {
        QNorm(self.0.map(|a| a + e))
    }
    pub fn value(self, q: u32) -> BigRational {
        match self.0 {
            None => BigRational::zero(),
            Some(e) => qpow_rat(q, e),
        }
    }
}

impl fmt::Debug for QNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "0"),
            Some(e) => write!(f, "q^{e}"),
        }
    }
}

/// `q^e` as an exact rational.
pub fn qpow_rat(q: u32, e: i64) -> BigRational {
    let b = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_pow(r: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), e.unsigned_abs() as usize)
    }
}

/// Compares `q^e` (rational `e`) with a positive rational `r`.
pub fn cmp_qpow(q: u32, e: QExp, r: &BigRational) -> Ordering {
    if !r.is_positive() {
        return Ordering::Greater;
    }
    let (n, m) = (*e.numer(), *e.denom());
    qpow_rat(q, n).cmp(&rat_pow(r, m))
}

/// Compares `q^e · a` with `q^f · b` for positive rationals `a, b` and rational exponents.
pub fn cmp_scaled(q: u32, e: QExp, a: &BigRational, f: QExp, b: &BigRational) -> Ordering {
    // q^{e-f} vs b/a
    cmp_qpow(q, e - f, &(b / a))
}

/// Largest integer `k` with `q^k <= r` (`r > 0`).
pub fn floor_log(q: u32, r: &BigRational) -> i64 {
    assert!(r.is_positive(), "floor_log of nonpositive value");
    let approx = r.to_f64().map(|x| x.log(q as f64)).filter(|x| x.is_finite());
    let mut k = approx.map(|x| x.floor() as i64).unwrap_or(0);
    while qpow_rat(q, k) > *r {
        k -= 1;
    }
    while qpow_rat(q, k + 1) <= *r {
        k += 1;
    }
    k
}

/// Largest integer `k` with `q^k < r` (strict).
pub fn floor_log_strict(q: u32, r: &BigRational) -> i64 {
    let k = floor_log(q, r);
    if qpow_rat(q, k) == *r {
        k - 1
    } else {
        k
    }
}

/// Parses `"a/b"`, `"a"`, a decimal such as `"0.25"`, or `"q^-k"` / `"2^-3"` into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse rational '{s}'"));
    if let Some((b, e)) = s.split_once('^') {
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        let e: i64 = e.trim().parse().map_err(|_| bad())?;
        if b <= 0 {
            return Err(bad());
        }
        return Ok(rat_pow(&BigRational::from_integer(b.into()), e));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, frac)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let digits = format!("{}{}", i.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = BigInt::from(10).pow(frac.len() as u32);
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Serde helper: rationals as `"n/d"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A certified enclosure `lo <= x <= hi` of a real number, with rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

/// Reports show the endpoints as floats; the exact endpoints stay in memory.
impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Enclosure", 2)?;
        st.serialize_field("lo", &to_f64(&self.lo))?;
        st.serialize_field("hi", &to_f64(&self.hi))?;
        st.end()
    }
}

impl Enclosure {
    pub fn exact(r: BigRational) -> Self {
        Enclosure { lo: r.clone(), hi: r }
    }
    pub fn zero() -> Self {
        Enclosure::exact(BigRational::zero())
    }
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
    pub fn add(&self, o: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
    /// Product of two enclosures of nonnegative numbers.
    pub fn mul_nonneg(&self, o: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo * &o.lo, hi: &self.hi * &o.hi }
    }
    pub fn scale(&self, r: &BigRational) -> Enclosure {
        if r.is_negative() {
            Enclosure { lo: &self.hi * r, hi: &self.lo * r }
        } else {
            Enclosure { lo: &self.lo * r, hi: &self.hi * r }
        }
    }
    /// Reciprocal of an enclosure of a positive number.
    pub fn recip_pos(&self) -> Enclosure {
        Enclosure { lo: self.hi.recip(), hi: self.lo.recip() }
    }
    pub fn sub(&self, o: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }
    /// `Some(ordering)` when the comparison with `r` is decided by the enclosure.
    pub fn cmp_rat(&self, r: &BigRational) -> Option<Ordering> {
        if self.hi < *r {
            Some(Ordering::Less)
        } else if self.lo > *r {
            Some(Ordering::Greater)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
    /// Decides `x <= r`; `None` if the enclosure straddles `r`.
    pub fn le(&self, r: &BigRational) -> Option<bool> {
        if self.hi <= *r {
            Some(true)
        } else if self.lo > *r {
            Some(false)
        } else {
            None
        }
    }
    /// Decides `x >= r`.
    pub fn ge(&self, r: &BigRational) -> Option<bool> {
        if self.lo >= *r {
            Some(true)
        } else if self.hi < *r {
            Some(false)
        } else {
            None
        }
    }
    pub fn mid_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }
    /// Rounds the endpoints outward to dyadic rationals with `bits` fractional bits
    /// relative to the magnitude, keeping sizes bounded in long sums.
    pub fn round_out(&self, bits: u32) -> Enclosure {
        Enclosure { lo: round_dyadic(&self.lo, bits, false), hi: round_dyadic(&self.hi, bits, true) }
    }
}

fn round_dyadic(r: &BigRational, bits: u32, up: bool) -> BigRational {
    if r.is_zero() || r.denom().bits() <= 64 {
        return r.clone();
    }
    // scale = 2^(bits - floor(log2 |r|))
    let mag = r.numer().bits() as i64 - r.denom().bits() as i64;
    let shift = bits as i64 - mag;
    let scale = if shift >= 0 {
        BigRational::from_integer(BigInt::one() << shift as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-shift) as usize)
    };
    let scaled = r * &scale;
    let n = if up { scaled.ceil() } else { scaled.floor() };
    n / scale
}

/// Certified enclosures of `q^e` for rational `e`, verified by exact integer powers.
#[derive(Default)]
pub struct QPowCache {
    cache: HashMap<(u32, i64, i64), Enclosure>,
}

impl QPowCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, q: u32, e: QExp) -> Enclosure {
        let key = (q, *e.numer(), *e.denom());
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let v = qpow_enclosure(q, e);
        self.cache.insert(key, v.clone());
        v
    }
}

/// Enclosure of `q^{n/m}`; exact when `m = 1`.
pub fn qpow_enclosure(q: u32, e: QExp) -> Enclosure {
    let (n, m) = (*e.numer(), *e.denom());
    if m == 1 {
        return Enclosure::exact(qpow_rat(q, n));
    }
    // Split off the integer part so the root is taken of a modest number.
    let ip = n.div_euclid(m);
    let fp = n.rem_euclid(m); // 0 < fp < m
    let base = qpow_rat(q, ip);
    let target = BigUint::from(q).pow(fp as u32); // enclose target^(1/m) in (1, q)
    let approx = (q as f64).powf(fp as f64 / m as f64);
    let mut rel = 1e-13;
    loop {
        let lo = f64_to_rat(approx * (1.0 - rel));
        let hi = f64_to_rat(approx * (1.0 + rel));
        let t = BigRational::from_integer(BigInt::from(target.clone()));
        if rat_pow(&lo, m) <= t && rat_pow(&hi, m) >= t {
            return Enclosure { lo: &lo * &base, hi: &hi * &base };
        }
        rel *= 16.0;
    }
}

/// Certified enclosure of `Σ_k c_k q^{-k t}` with integer `k >= 1`, `t > 0` rational: the
/// geometric tail `Σ_{k > K} c q^{-k t}` for a constant `c`.
pub fn geometric_tail(q: u32, c: &BigRational, t: QExp, from_k: i64, cache: &mut QPowCache) -> Enclosure {
    // c q^{-from_k t} / (1 - q^{-t})
    let first = cache.get(q, -t * from_k);
    let ratio = cache.get(q, -t);
    let one = Enclosure::exact(BigRational::one());
    let denom = one.sub(&ratio);
    first.mul_nonneg(&denom.recip_pos()).scale(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qnorm_order() {
        assert!(QNorm::ZERO < QNorm::pow(-100));
        assert!(QNorm::pow(-1) < QNorm::ONE);
        assert_eq!(QNorm::pow(2).mul(QNorm::pow(-3)), QNorm::pow(-1));
        assert!(QNorm::ZERO.mul(QNorm::pow(3)).is_zero());
    }

    #[test]
    fn cmp_qpow_exact() {
        // 2^{1/2} vs 3/2 : 2 < 9/4
        assert_eq!(cmp_qpow(2, QExp::new(1, 2), &rat(3, 2)), Ordering::Less);
        assert_eq!(cmp_qpow(2, QExp::new(-2, 1), &rat(1, 4)), Ordering::Equal);
        assert_eq!(cmp_qpow(3, QExp::new(-4, 3), &rat(1, 4)), Ordering::Less);
    }

    #[test]
    fn enclosure_contains_value() {
        for (q, n, m) in [(2u32, 1i64, 2i64), (3, -7, 3), (2, 3073, 2048), (5, 11, 6)] {
            let e = qpow_enclosure(q, QExp::new(n, m));
            let v = (q as f64).powf(n as f64 / m as f64);
            assert!(to_f64(&e.lo) <= v * (1.0 + 1e-15) && to_f64(&e.hi) >= v * (1.0 - 1e-15));
            assert!(to_f64(&(&e.hi - &e.lo)) <= v * 1e-9);
        }
    }

    #[test]
    fn parse_and_floor_log() {
        assert_eq!(parse_rational("1/4").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("2^-3").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(floor_log(2, &rat(1, 4)), -2);
        assert_eq!(floor_log_strict(2, &rat(1, 4)), -3);
        assert_eq!(floor_log(3, &rat(10, 1)), 2);
        assert_eq!(floor_log(2, &rat(1, 9)), -4);
    }
}
