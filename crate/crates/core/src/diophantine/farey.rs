//! Farey lattices `Λ_u = R^d + R û` and the quantity
//! `r(u) = min{A(û, v) : v ∈ Q, |v| <= |u|, v ∉ F_q^* u}`.
//!
//! Reduction of `Λ_u` gives `λ_1(Λ_u) = r(u)`, `det Λ_u = |u|⁻¹` and the
//! normalised minima `λ̂_i = |u|^{1/d} λ_i`.

use serde::{Deserialize, Serialize};

use super::pair::ApproxPair;
use crate::error::{Error, Result};
use crate::ffpoly::{Fe, Field, Poly};
use crate::lattice::det::solve;
use crate::lattice::ReducedLattice;
use crate::laurent::{vec_sub, RatFn};
use crate::qexp::{QExp, QNorm};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyLattice {
    /// Canonical (monic `b`) representative.
    pub u: ApproxPair,
    pub lattice: ReducedLattice,
}

/// Reduces `Λ_u` from the generating set `{e_1, …, e_d, û}` (cleared by `b`).
pub fn farey_lattice(u: &ApproxPair, f: &Field) -> FareyLattice {
    let u = u.canonical(f);
    let d = u.d();
    let mut cols: Vec<Vec<Poly>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { u.b.clone() } else { Poly::zero() }).collect())
        .collect();
    cols.push(u.a.clone());
    let lattice = ReducedLattice::from_poly_generators(u.b.clone(), cols, f).expect("b is nonzero");
    debug_assert_eq!(lattice.rank(), d);
    FareyLattice { u, lattice }
}

impl FareyLattice {
    pub fn d(&self) -> usize {
        self.u.d()
    }
    /// `log_q |u|`.
    pub fn u_exp(&self) -> i64 {
        self.u.deg()
    }
    pub fn minima_exps(&self) -> Vec<i64> {
        self.lattice.minima_exps()
    }
    /// `log_q λ_1(Λ_u) = log_q r(u)`.
    pub fn r_exp(&self) -> i64 {
        self.lattice.lambda1_exp()
    }
    /// `log_q λ_i`, 0-based.
    pub fn lambda_exp(&self, i: usize) -> i64 {
        self.lattice.minimum_exp(i)
    }
    /// `log_q λ̂_i = deg u / d + log_q λ_i`, 0-based.
    pub fn lambda_hat_exp(&self, i: usize) -> QExp {
        QExp::new(self.u_exp(), self.d() as i64) + self.lambda_exp(i)
    }
    pub fn lambda_hat1_exp(&self) -> QExp {
        self.lambda_hat_exp(0)
    }
    pub fn lambda_hat_last_exp(&self) -> QExp {
        self.lambda_hat_exp(self.d() - 1)
    }
    pub fn xi(&self, i: usize, f: &Field) -> Vec<RatFn> {
        self.lattice.xi(i, f)
    }

    /// Coordinates of `v̂ − û` in the reduced basis.
    fn offset_coords(&self, v: &ApproxPair, f: &Field) -> Vec<RatFn> {
        let diff = vec_sub(&v.hat(f), &self.u.hat(f), f);
        let cols: Vec<Vec<RatFn>> = (0..self.d()).map(|i| self.xi(i, f)).collect();
        solve(&cols, &diff, f).expect("reduced basis spans K^d")
    }

    /// `v ∈ H_u`, i.e. `v̂ − û ∈ H'_u = span(ξ_1, …, ξ_{d-1})`.
    pub fn in_h_u(&self, v: &ApproxPair, f: &Field) -> bool {
        self.offset_coords(v, f).last().is_none_or(RatFn::is_zero)
    }

    /// Coordinates of a lattice vector in the reduced basis (polynomials), or an error.
    pub fn lattice_coords(&self, alpha: &[RatFn], f: &Field) -> Result<Vec<Poly>> {
        let c = self
            .lattice
            .coords(alpha, f)
            .ok_or_else(|| Error::NotInLattice("outside the span".into()))?;
        c.into_iter()
            .map(|r| {
                if r.is_poly() {
                    Ok(r.num().clone())
                } else {
                    Err(Error::NotInLattice("non-polynomial coordinate".into()))
                }
            })
            .collect()
    }
}

/// `r(u)` by exhaustive search over `b'` with `deg b' < deg b` (Gray code, linear in `b'`).
///
/// Values for `b' ∈ F_q^* b + (lower terms)` repeat those of the lower terms, and
/// `b' ∈ F_q^* b` itself is excluded, so this is the full minimum in the definition.
/// For `|u| = 1` every admissible `v` has `A(û, v) >= 1`, attained, so `r(u) = 1`.
pub fn r_of_u_bruteforce(u: &ApproxPair, f: &Field) -> QNorm {
    let n = u.deg() as usize;
    if n == 0 {
        return QNorm::ONE;
    }
    let d = u.d();
    let q = f.q() as usize;
    // images of x^j: (x^j a_i mod b) as dense coefficient rows of length n
    let mut images = vec![0 as Fe; n * d * n];
    for j in 0..n {
        for (i, ai) in u.a.iter().enumerate() {
            let r = ai.shift(j).rem(&u.b, f).unwrap();
            for t in 0..n {
                images[(j * d + i) * n + t] = r.coeff(t);
            }
        }
    }
    let mut acc = vec![0 as Fe; d * n];
    let mut digits = vec![0usize; n];
    let mut best = n as i64; // sentinel above any fractional exponent shift
    let total = q.pow(n as u32);
    for step in 1..total {
        // modular Gray code: digit = number of trailing zeros of `step` in base q
        let mut j = 0;
        let mut s = step;
        while s % q == 0 {
            s /= q;
            j += 1;
        }
        let old = digits[j] as Fe;
        let new = ((digits[j] + 1) % q) as Fe;
        digits[j] = new as usize;
        let delta = f.sub(new, old);
        let img = &images[j * d * n..(j + 1) * d * n];
        for (a, &w) in acc.iter_mut().zip(img) {
            if w != 0 {
                *a = f.add(*a, f.mul(delta, w));
            }
        }
        // degree of the residue vector
        let mut deg: i64 = -1;
        for i in 0..d {
            let row = &acc[i * n..(i + 1) * n];
            if let Some(t) = row.iter().rposition(|&c| c != 0) {
                deg = deg.max(t as i64);
            }
        }
        if deg >= 0 && deg < best {
            best = deg;
        }
    }
    QNorm::pow(best - n as i64)
}

/// `log_q r(u)` computed from `Λ_u` (the lattice route).
pub fn r_of_u(u: &ApproxPair, f: &Field) -> QNorm {
    QNorm::pow(farey_lattice(u, f).r_exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_r_value() {
        let f = Field::of_order(2).unwrap();
        // u = (1, x^2) in d = 1: Λ_u = span{1, 1/x^2}, λ_1 = q^-2
        let u = ApproxPair::new(vec![Poly::one()], Poly::monomial(1, 2), &f).unwrap();
        let fl = farey_lattice(&u, &f);
        assert_eq!(fl.r_exp(), -2);
        assert_eq!(r_of_u_bruteforce(&u, &f), QNorm::pow(-2));
        assert_eq!(fl.lattice.covolume_exp(), -2);
    }

    #[test]
    fn unit_denominator() {
        let f = Field::of_order(3).unwrap();
        let u = ApproxPair::new(vec![Poly::x(), Poly::one()], Poly::one(), &f).unwrap();
        assert_eq!(r_of_u_bruteforce(&u, &f), QNorm::ONE);
        assert_eq!(farey_lattice(&u, &f).r_exp(), 0);
    }
}
