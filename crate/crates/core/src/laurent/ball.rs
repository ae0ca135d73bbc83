//! Closed ultrametric balls `B(c, r) = {y : ‖y - c‖ <= r}` with radius in `q^Z`.
//!
//! Any two such balls are nested or disjoint; the diameter of `B(c, q^e)` in
//! F_q((x⁻¹))^d is exactly `q^e`.

use serde::{Deserialize, Serialize};

use super::series::{lvec_norm, LVec};
use crate::error::Result;
use crate::ffpoly::Field;
use crate::qexp::QNorm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: LVec,
    /// Radius exponent: the ball has radius `q^radius`.
    pub radius: i64,
}

impl Ball {
    pub fn new(center: LVec, radius: i64) -> Self {
        Ball { center, radius }
    }

    pub fn diameter(&self) -> QNorm {
        QNorm::pow(self.radius)
    }

    pub fn contains_point(&self, y: &LVec, f: &Field) -> Result<bool> {
        let diff: LVec = self.center.iter().zip(y).map(|(a, b)| a.sub(b, f)).collect();
        Ok(lvec_norm(&diff)? <= QNorm::pow(self.radius))
    }

    /// `other ⊆ self`.
    pub fn contains_ball(&self, other: &Ball, f: &Field) -> Result<bool> {
        Ok(other.radius <= self.radius && self.contains_point(&other.center, f)?)
    }

    pub fn disjoint(&self, other: &Ball, f: &Field) -> Result<bool> {
        Ok(!ball_distance(self, other, f)?.is_zero())
    }
}

/// `0` if the balls meet (then one contains the other), else `‖c - c'‖`.
pub fn ball_distance(a: &Ball, b: &Ball, f: &Field) -> Result<QNorm> {
    let diff: LVec = a.center.iter().zip(&b.center).map(|(x, y)| x.sub(y, f)).collect();
    let d = lvec_norm(&diff)?;
    if d <= QNorm::pow(a.radius.max(b.radius)) {
        Ok(QNorm::ZERO)
    } else {
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Poly;
    use crate::laurent::{Laurent, RatFn};

    fn pt(f: &Field, num: &[u8], den: &[u8]) -> LVec {
        let r = RatFn::new(Poly::from_coeffs(num.iter().copied()), Poly::from_coeffs(den.iter().copied()), f).unwrap();
        vec![Laurent::from_ratfn(&r, -20, f)]
    }

    #[test]
    fn nested_or_disjoint() {
        let f = Field::of_order(2).unwrap();
        let a = Ball::new(pt(&f, &[1], &[0, 1]), -1); // centre 1/x
        let b = Ball::new(pt(&f, &[1], &[0, 0, 1]), -2); // centre 1/x^2
        let c = Ball::new(pt(&f, &[1, 1], &[0, 0, 1]), -3); // centre (x+1)/x^2
        assert_eq!(ball_distance(&a, &b, &f).unwrap(), QNorm::ZERO);
        assert!(a.contains_ball(&b, &f).unwrap() || b.contains_ball(&a, &f).unwrap());
        assert_eq!(ball_distance(&b, &c, &f).unwrap(), QNorm::pow(-1));
        assert!(b.disjoint(&c, &f).unwrap());
    }
}
