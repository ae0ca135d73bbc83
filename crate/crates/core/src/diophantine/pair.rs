//! Primitive approximation pairs `u = (a, b) ∈ R^d × (R \ {0})` with `gcd(a_1..a_d, b) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{gcd_all, Field, Poly};
use crate::laurent::{lvec_norm_bound, vec_norm, vec_sub, LVec, NormBound, RatFn};
use crate::qexp::QNorm;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ApproxPair {
    pub a: Vec<Poly>,
    pub b: Poly,
}

impl ApproxPair {
    pub fn new(a: Vec<Poly>, b: Poly, f: &Field) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let u = ApproxPair { a, b };
        if !u.is_primitive(f) {
            return Err(Error::NotPrimitive);
        }
        Ok(u)
    }

    /// `(0, …, 0, 1)`, the root of the fractal structures.
    pub fn root(d: usize) -> Self {
        ApproxPair { a: vec![Poly::zero(); d], b: Poly::one() }
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    /// `log_q |u| = deg b`.
    pub fn deg(&self) -> i64 {
        self.b.deg()
    }

    pub fn norm(&self) -> QNorm {
        self.b.norm()
    }

    pub fn is_primitive(&self, f: &Field) -> bool {
        !self.b.is_zero() && gcd_all(self.a.iter().chain([&self.b]), f).is_one()
    }

    /// `û = a / b`.
    pub fn hat(&self, f: &Field) -> Vec<RatFn> {
        self.a
            .iter()
            .map(|ai| RatFn::new(ai.clone(), self.b.clone(), f).unwrap())
            .collect()
    }

    /// The representative of `F_q^* u` with monic `b`.
    pub fn canonical(&self, f: &Field) -> Self {
        let c = f.inv(self.b.lc());
        if c == 1 {
            return self.clone();
        }
        ApproxPair { a: self.a.iter().map(|p| p.scale(c, f)).collect(), b: self.b.scale(c, f) }
    }

    pub fn is_canonical(&self) -> bool {
        self.b.is_monic()
    }

    pub fn scale(&self, c: u8, f: &Field) -> Self {
        ApproxPair { a: self.a.iter().map(|p| p.scale(c, f)).collect(), b: self.b.scale(c, f) }
    }

    /// `v ∈ F_q^* u`.
    pub fn same_orbit(&self, o: &ApproxPair, f: &Field) -> bool {
        self.canonical(f) == o.canonical(f)
    }

    pub fn reduced_mod_b(&self, f: &Field) -> Self {
        ApproxPair { a: self.a.iter().map(|p| p.rem(&self.b, f).unwrap()).collect(), b: self.b.clone() }
    }
}

/// `A(θ, u) = ‖bθ − a‖` for a (possibly truncated) `θ`.
pub fn approx_quality(theta: &LVec, u: &ApproxPair, f: &Field) -> Result<NormBound> {
    if theta.len() != u.d() {
        return Err(Error::Dimension("θ and u differ in dimension".into()));
    }
    let diff: LVec = theta
        .iter()
        .zip(&u.a)
        .map(|(t, a)| t.mul_poly(&u.b, f).sub(&crate::laurent::Laurent::from_poly(a, t.low(), f), f))
        .collect();
    Ok(lvec_norm_bound(&diff))
}

/// `A(θ, u)` for an exact rational `θ`.
pub fn approx_quality_exact(theta: &[RatFn], u: &ApproxPair, f: &Field) -> QNorm {
    theta
        .iter()
        .zip(&u.a)
        .map(|(t, a)| t.mul_poly(&u.b, f).sub(&RatFn::from_poly(a.clone()), f).norm())
        .max()
        .unwrap_or(QNorm::ZERO)
}

/// `π_u(v) = b_v û − a_v`.
pub fn pi_u(u: &ApproxPair, v: &ApproxPair, f: &Field) -> Vec<RatFn> {
    u.hat(f)
        .iter()
        .zip(&v.a)
        .map(|(h, a)| h.mul_poly(&v.b, f).sub(&RatFn::from_poly(a.clone()), f))
        .collect()
}

/// `‖û − v̂‖`.
pub fn hat_distance(u: &ApproxPair, v: &ApproxPair, f: &Field) -> QNorm {
    vec_norm(&vec_sub(&u.hat(f), &v.hat(f), f))
}

/// `log_q |u ∧ v| = log(|u| |v| ‖û − v̂‖)`; `None` when `v̂ = û`.
pub fn wedge_exp(u: &ApproxPair, v: &ApproxPair, f: &Field) -> Option<i64> {
    hat_distance(u, v, f).exp().map(|e| e + u.deg() + v.deg())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitivity_and_canonical() {
        let f = Field::of_order(3).unwrap();
        let x = Poly::x();
        assert!(ApproxPair::new(vec![x.clone()], x.clone(), &f).is_err());
        let u = ApproxPair::new(vec![Poly::one()], x.scale(2, &f), &f).unwrap();
        let c = u.canonical(&f);
        assert!(c.is_canonical());
        assert!(c.same_orbit(&u, &f));
        assert_eq!(c.hat(&f), u.hat(&f));
    }
}
