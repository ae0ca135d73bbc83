//! Exact elements of K = F_q(x): reduced fractions with monic denominator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::qexp::QNorm;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "(Poly, Poly)", into = "(Poly, Poly)")]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl TryFrom<(Poly, Poly)> for RatFn {
    type Error = Error;
    fn try_from((n, d): (Poly, Poly)) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // Reduction needs the field; serialised values are stored reduced, so only
        // check the shape here and trust the writer.
        Ok(RatFn { num: n, den: d })
    }
}

impl From<RatFn> for (Poly, Poly) {
    fn from(r: RatFn) -> Self {
        (r.num, r.den)
    }
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn { num: Poly::zero(), den: Poly::one() }
    }
    pub fn one() -> Self {
        RatFn { num: Poly::one(), den: Poly::one() }
    }
    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn new(num: Poly, den: Poly, f: &Field) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFn::zero());
        }
        let g = num.gcd(&den, f);
        let (mut n, mut d) = (num.exact_div(&g, f)?, den.exact_div(&g, f)?);
        let c = f.inv(d.lc());
        n = n.scale(c, f);
        d = d.scale(c, f);
        Ok(RatFn { num: n, den: d })
    }

    /// Re-normalises a value read from outside (e.g. JSON).
    pub fn normalized(&self, f: &Field) -> Result<Self> {
        RatFn::new(self.num.clone(), self.den.clone(), f)
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    /// `|f/g| = q^{deg f - deg g}`.
    pub fn norm(&self) -> QNorm {
        if self.num.is_zero() {
            QNorm::ZERO
        } else {
            QNorm::pow(self.num.deg() - self.den.deg())
        }
    }

    pub fn add(&self, o: &RatFn, f: &Field) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num, f), self.den.clone(), f).unwrap();
        }
        let n = self.num.mul(&o.den, f).add(&o.num.mul(&self.den, f), f);
        RatFn::new(n, self.den.mul(&o.den, f), f).unwrap()
    }
    pub fn neg(&self, f: &Field) -> RatFn {
        RatFn { num: self.num.neg(f), den: self.den.clone() }
    }
    pub fn sub(&self, o: &RatFn, f: &Field) -> RatFn {
        self.add(&o.neg(f), f)
    }
    pub fn mul(&self, o: &RatFn, f: &Field) -> RatFn {
        RatFn::new(self.num.mul(&o.num, f), self.den.mul(&o.den, f), f).unwrap()
    }
    pub fn mul_poly(&self, p: &Poly, f: &Field) -> RatFn {
        RatFn::new(self.num.mul(p, f), self.den.clone(), f).unwrap()
    }
    pub fn inv(&self, f: &Field) -> Result<RatFn> {
        RatFn::new(self.den.clone(), self.num.clone(), f)
    }
    pub fn div(&self, o: &RatFn, f: &Field) -> Result<RatFn> {
        Ok(self.mul(&o.inv(f)?, f))
    }

    /// Polynomial part (the terms of nonnegative exponent).
    pub fn poly_part(&self, f: &Field) -> Poly {
        self.num.div_rem(&self.den, f).unwrap().0
    }
    /// Fractional part, of norm `< 1`.
    pub fn frac_part(&self, f: &Field) -> RatFn {
        let r = self.num.rem(&self.den, f).unwrap();
        RatFn { num: r, den: self.den.clone() }
    }
}

/// Sup norm of a vector of rational functions.
pub fn vec_norm(v: &[RatFn]) -> QNorm {
    v.iter().map(RatFn::norm).max().unwrap_or(QNorm::ZERO)
}

pub fn vec_sub(a: &[RatFn], b: &[RatFn], f: &Field) -> Vec<RatFn> {
    a.iter().zip(b).map(|(x, y)| x.sub(y, f)).collect()
}

pub fn vec_add(a: &[RatFn], b: &[RatFn], f: &Field) -> Vec<RatFn> {
    a.iter().zip(b).map(|(x, y)| x.add(y, f)).collect()
}

pub fn vec_scale(a: &[RatFn], c: &RatFn, f: &Field) -> Vec<RatFn> {
    a.iter().map(|x| x.mul(c, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_and_parts() {
        let f = Field::of_order(3).unwrap();
        let n = Poly::from_coeffs([1, 0, 0, 2]); // 2x^3 + 1
        let d = Poly::from_coeffs([0, 2]); // 2x
        let r = RatFn::new(n.clone(), d.clone(), &f).unwrap();
        assert!(r.den().is_monic());
        assert_eq!(r.norm(), QNorm::pow(2));
        let back = RatFn::from_poly(r.poly_part(&f)).add(&r.frac_part(&f), &f);
        assert_eq!(back, r);
        assert!(r.frac_part(&f).norm() < QNorm::ONE);
    }
}
