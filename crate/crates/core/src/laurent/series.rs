//! Truncated Laurent series in x⁻¹ with a certified precision floor.
//!
//! A [`Laurent`] knows its coefficients for every exponent `>= low` and nothing
//! below. When it was built from a rational function the exact value is kept as
//! well, so norms of exact values never depend on the truncation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ratfn::RatFn;
use crate::error::{Error, Result};
use crate::ffpoly::{Fe, Field, Poly};
use crate::qexp::QNorm;

/// What is known about an absolute value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormBound {
    /// The value is known exactly.
    Exact(QNorm),
    /// The value is `< q^e` (possibly zero) and nothing more is certified.
    Below(i64),
}

impl NormBound {
    /// Certified comparison; `None` when the available precision cannot decide.
    pub fn cmp_certain(&self, o: &NormBound) -> Option<Ordering> {
        use NormBound::*;
        match (*self, *o) {
            (Exact(a), Exact(b)) => Some(a.cmp(&b)),
            (Below(e), Exact(b)) => match b.exp() {
                Some(f) if f >= e => Some(Ordering::Less),
                _ => None,
            },
            (Exact(_), Below(_)) => o.cmp_certain(self).map(Ordering::reverse),
            (Below(_), Below(_)) => None,
        }
    }

    pub fn exact(&self) -> Option<QNorm> {
        match self {
            NormBound::Exact(n) => Some(*n),
            NormBound::Below(_) => None,
        }
    }

    /// An upper bound `q^e` with the value `<= q^e` (`None` for exact zero).
    pub fn upper_exp(&self) -> Option<i64> {
        match self {
            NormBound::Exact(n) => n.exp(),
            NormBound::Below(e) => Some(e - 1),
        }
    }

    /// Bound for the maximum of two values.
    pub fn max(self, o: NormBound) -> NormBound {
        use NormBound::*;
        match (self, o) {
            (Exact(a), Exact(b)) => Exact(a.max(b)),
            (Exact(a), Below(e)) | (Below(e), Exact(a)) => {
                if a >= QNorm::pow(e - 1) {
                    Exact(a)
                } else {
                    Below(e)
                }
            }
            (Below(a), Below(b)) => Below(a.max(b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent {
    /// Exponent of `coeffs[0]`; meaningless when `coeffs` is empty.
    top: i64,
    /// Coefficients of exponents `top, top-1, ..., low`; `coeffs[0] != 0` when nonempty.
    coeffs: Vec<Fe>,
    low: i64,
    exact: Option<RatFn>,
}

impl Laurent {
    /// Exact expansion of `r`, certified down to exponent `low`.
    pub fn from_ratfn(r: &RatFn, low: i64, f: &Field) -> Laurent {
        let mut s = Laurent { top: low - 1, coeffs: Vec::new(), low, exact: Some(r.clone()) };
        if r.is_zero() {
            return s;
        }
        let (num, den) = (r.num(), r.den());
        let top = num.deg() - den.deg();
        if top < low {
            return s;
        }
        let (q, mut rem) = num.div_rem(den, f).unwrap();
        let mut digits = Vec::with_capacity((top - low + 1) as usize);
        for e in (0..=top).rev() {
            if e >= low {
                digits.push(q.coeff(e as usize));
            }
        }
        // fractional digits: rem/den = sum_{e<0} c_e x^e
        let dd = den.deg() as usize;
        let inv = f.inv(den.lc());
        let mut e = -1;
        while e >= low {
            rem = rem.shift(1);
            let c = f.mul(rem.coeff(dd), inv);
            rem.sub_scaled_shift(den, c, 0, f);
            if e <= top {
                digits.push(c);
            }
            e -= 1;
        }
        s.top = top;
        s.coeffs = digits;
        s.normalize();
        s
    }

    pub fn from_poly(p: &Poly, low: i64, f: &Field) -> Laurent {
        Laurent::from_ratfn(&RatFn::from_poly(p.clone()), low, f)
    }

    /// A truncated series with coefficients for exponents `top, top-1, ..., top-len+1`.
    pub fn from_digits(top: i64, coeffs: Vec<Fe>) -> Laurent {
        let low = top - coeffs.len() as i64 + 1;
        let mut s = Laurent { top, coeffs, low, exact: None };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|&c| c != 0);
        match lead {
            None => {
                self.coeffs.clear();
                self.top = self.low - 1;
            }
            Some(i) => {
                self.coeffs.drain(..i);
                self.top -= i as i64;
            }
        }
    }

    pub fn low(&self) -> i64 {
        self.low
    }
    /// Precision `P`: terms `x^{-m}` with `m <= P` are certified.
    pub fn prec(&self) -> i64 {
        -self.low
    }
    pub fn exact(&self) -> Option<&RatFn> {
        self.exact.as_ref()
    }
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
    pub fn lead_exp(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.top)
    }
    pub fn digits(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient of `x^e`, `None` below the certified precision.
    pub fn coeff(&self, e: i64) -> Option<Fe> {
        if e < self.low {
            return None;
        }
        if self.coeffs.is_empty() || e > self.top {
            return Some(0);
        }
        Some(self.coeffs[(self.top - e) as usize])
    }

    pub fn norm_bound(&self) -> NormBound {
        if let Some(r) = &self.exact {
            return NormBound::Exact(r.norm());
        }
        if self.coeffs.is_empty() {
            NormBound::Below(self.low)
        } else {
            NormBound::Exact(QNorm::pow(self.top))
        }
    }

    /// The norm, or [`Error::IndeterminateNorm`] when the value is zero to precision.
    pub fn norm(&self) -> Result<QNorm> {
        match self.norm_bound() {
            NormBound::Exact(n) => Ok(n),
            NormBound::Below(e) => Err(Error::IndeterminateNorm(e)),
        }
    }

    /// Changes the precision floor; lowering it requires an exact value.
    pub fn with_low(&self, low: i64, f: &Field) -> Result<Laurent> {
        if let Some(r) = &self.exact {
            return Ok(Laurent::from_ratfn(r, low, f));
        }
        if low < self.low {
            return Err(Error::Precision(format!(
                "cannot extend a truncated series below exponent {} (requested {low})",
                self.low
            )));
        }
        let top = self.top.max(low - 1);
        Ok(Laurent::from_digits(top, (low..=top).rev().map(|e| self.coeff(e).unwrap()).collect()))
    }

    /// Forgets the exact value, keeping only the certified digits.
    pub fn truncated(&self) -> Laurent {
        Laurent { exact: None, ..self.clone() }
    }

    pub fn sub(&self, o: &Laurent, f: &Field) -> Laurent {
        let low = self.low.max(o.low);
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            return Laurent::from_ratfn(&a.sub(b, f), low, f);
        }
        let top = self.top.max(o.top).max(low - 1);
        let digits = (low..=top)
            .rev()
            .map(|e| f.sub(self.coeff(e).unwrap(), o.coeff(e).unwrap()))
            .collect();
        Laurent::from_digits(top, digits)
    }

    pub fn mul_poly(&self, p: &Poly, f: &Field) -> Laurent {
        if p.is_zero() {
            return Laurent::from_ratfn(&RatFn::zero(), 0, f);
        }
        let dp = p.deg();
        let low = self.low + dp;
        if let Some(r) = &self.exact {
            return Laurent::from_ratfn(&r.mul_poly(p, f), low, f);
        }
        if self.coeffs.is_empty() {
            return Laurent { top: low - 1, coeffs: Vec::new(), low, exact: None };
        }
        let top = self.top + dp;
        let digits = (low..=top)
            .rev()
            .map(|e| {
                let mut acc = 0;
                for (j, &c) in p.coeffs().iter().enumerate() {
                    if c != 0 {
                        let t = self.coeff(e - j as i64).unwrap_or(0);
                        acc = f.add(acc, f.mul(c, t));
                    }
                }
                acc
            })
            .collect();
        Laurent::from_digits(top, digits)
    }

    /// Splits into polynomial part and fractional part (norm `< 1`).
    pub fn split(&self, f: &Field) -> Result<(Poly, Laurent)> {
        if let Some(r) = &self.exact {
            let frac = r.frac_part(f);
            return Ok((r.poly_part(f), Laurent::from_ratfn(&frac, self.low, f)));
        }
        if self.low > 0 {
            return Err(Error::Precision("polynomial part not certified".into()));
        }
        let pp = if self.coeffs.is_empty() || self.top < 0 {
            Poly::zero()
        } else {
            Poly::from_coeffs((0..=self.top).map(|e| self.coeff(e).unwrap()))
        };
        let top = (-1).max(self.low - 1);
        let frac = Laurent::from_digits(top, (self.low..=top).rev().map(|e| self.coeff(e).unwrap()).collect());
        Ok((pp, frac))
    }
}

/// Vector of Laurent series with the sup norm.
pub type LVec = Vec<Laurent>;

pub fn lvec_norm_bound(v: &[Laurent]) -> NormBound {
    v.iter()
        .map(Laurent::norm_bound)
        .fold(NormBound::Exact(QNorm::ZERO), NormBound::max)
}

pub fn lvec_norm(v: &[Laurent]) -> Result<QNorm> {
    match lvec_norm_bound(v) {
        NormBound::Exact(n) => Ok(n),
        NormBound::Below(e) => Err(Error::IndeterminateNorm(e)),
    }
}

pub fn lvec_from_ratfns(v: &[RatFn], low: i64, f: &Field) -> LVec {
    v.iter().map(|r| Laurent::from_ratfn(r, low, f)).collect()
}

pub fn lvec_exact(v: &[Laurent]) -> Option<Vec<RatFn>> {
    v.iter().map(|l| l.exact().cloned()).collect()
}

/// JSON form: `{"lead_exp", "coeffs", "prec", "rational"}`.
#[derive(Serialize, Deserialize)]
struct LaurentJson {
    lead_exp: Option<i64>,
    coeffs: Vec<u32>,
    prec: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rational: Option<(Poly, Poly)>,
}

impl Serialize for Laurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LaurentJson {
            lead_exp: self.lead_exp(),
            coeffs: self.coeffs.iter().map(|&c| c as u32).collect(),
            prec: self.prec(),
            rational: self.exact.clone().map(Into::into),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Laurent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LaurentJson::deserialize(d)?;
        let low = -j.prec;
        let coeffs: Vec<Fe> = j.coeffs.iter().map(|&c| c as Fe).collect();
        let top = match j.lead_exp {
            Some(t) => t,
            None => low - 1,
        };
        if j.lead_exp.is_some() && top - coeffs.len() as i64 + 1 != low {
            return Err(serde::de::Error::custom("lead_exp, coeffs and prec are inconsistent"));
        }
        let mut l = Laurent::from_digits(top, coeffs);
        l.low = low;
        if let Some(r) = j.rational {
            l.exact = Some(RatFn::try_from(r).map_err(serde::de::Error::custom)?);
        }
        Ok(l)
    }
}

impl Laurent {
    /// Re-derives the digits from the exact value (if any) after deserialisation.
    pub fn normalized(&self, f: &Field) -> Result<Laurent> {
        match &self.exact {
            Some(r) => Ok(Laurent::from_ratfn(&r.normalized(f)?, self.low, f)),
            None => Ok(self.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_of_one_over_x_plus_one() {
        let f = Field::of_order(2).unwrap();
        // 1/(x+1) = x^-1 + x^-2 + ... over F_2
        let r = RatFn::new(Poly::one(), Poly::from_coeffs([1, 1]), &f).unwrap();
        let l = Laurent::from_ratfn(&r, -5, &f);
        assert_eq!(l.lead_exp(), Some(-1));
        assert_eq!(l.digits(), &[1, 1, 1, 1, 1]);
        assert_eq!(l.norm().unwrap(), QNorm::pow(-1));
    }

    #[test]
    fn indeterminate_norm() {
        let z = Laurent::from_digits(-1, vec![0, 0, 0]);
        assert_eq!(z.norm(), Err(Error::IndeterminateNorm(-3)));
        assert_eq!(z.norm_bound(), NormBound::Below(-3));
    }

    #[test]
    fn truncated_arithmetic_matches_exact() {
        let f = Field::of_order(3).unwrap();
        let r = RatFn::new(Poly::from_coeffs([1, 2, 0, 1]), Poly::from_coeffs([2, 0, 1, 1]), &f).unwrap();
        let p = Poly::from_coeffs([1, 1, 2]);
        let exact = Laurent::from_ratfn(&r, -10, &f);
        let trunc = exact.truncated();
        let a = exact.mul_poly(&p, &f);
        let b = trunc.mul_poly(&p, &f);
        for e in a.low()..5 {
            assert_eq!(a.coeff(e), b.coeff(e), "exponent {e}");
        }
        let (pa, fa) = a.split(&f).unwrap();
        let (pb, fb) = b.split(&f).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(fa.norm().unwrap(), fb.norm().unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let f = Field::of_order(2).unwrap();
        let r = RatFn::new(Poly::from_coeffs([1, 0, 1]), Poly::from_coeffs([0, 0, 0, 1]), &f).unwrap();
        let l = Laurent::from_ratfn(&r, -6, &f);
        let s = serde_json::to_string(&l).unwrap();
        let back: Laurent = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        let t = l.truncated();
        let back: Laurent = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
