//! Fibers of the projection `π_u(v) = b_v û − a_v` from pairs onto `Λ_u`.
//!
//! For `α ∈ Λ_u` with preimage `(a_1, b_1)`, `|b_1| < |b_0|`, every `v` with `π_u(v) = α`
//! and `|v| = q^k |u|` is `(a_1 + a_0 s, b_1 + b_0 s)` with `|s| = q^k`; if `α` is
//! primitive in `Λ_u` all of these are primitive, giving `(q − 1) q^k` pairs.

use super::pair::ApproxPair;
use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::laurent::RatFn;

/// `t` with `Σ t_i a_i ≡ 1 (mod b)`, from iterated extended gcds.
fn unit_combination(u: &ApproxPair, f: &Field) -> Result<Vec<Poly>> {
    let d = u.d();
    let mut g = u.b.clone();
    let mut t = vec![Poly::zero(); d];
    for i in 0..d {
        let (g2, x, y) = g.xgcd(&u.a[i], f);
        // g2 = x·g + y·a_i, and g ≡ Σ t_j a_j (mod b)
        for tj in t.iter_mut() {
            *tj = tj.mul(&x, f).rem(&u.b, f)?;
        }
        t[i] = y.rem(&u.b, f)?;
        g = g2;
    }
    if !g.is_one() {
        return Err(Error::NotPrimitive);
    }
    Ok(t.into_iter().map(|p| p.rem(&u.b, f).unwrap()).collect())
}

/// The preimage `(a_1, b_1)` of `α ∈ Λ_u` with `deg b_1 < deg b_0`.
pub fn pi_preimage(u: &ApproxPair, alpha: &[RatFn], f: &Field) -> Result<(Vec<Poly>, Poly)> {
    if alpha.len() != u.d() {
        return Err(Error::Dimension("α and u differ in dimension".into()));
    }
    let hat = u.hat(f);
    let b1 = if u.deg() == 0 {
        Poly::zero()
    } else {
        // p = b α is a polynomial vector with p ≡ c a (mod b)
        let p: Vec<Poly> = alpha
            .iter()
            .map(|al| {
                let v = al.mul_poly(&u.b, f);
                if v.is_poly() {
                    Ok(v.num().clone())
                } else {
                    Err(Error::NotInLattice("b·α is not a polynomial vector".into()))
                }
            })
            .collect::<Result<_>>()?;
        let t = unit_combination(u, f)?;
        t.iter()
            .zip(&p)
            .fold(Poly::zero(), |acc, (ti, pi)| acc.add(&ti.mul(pi, f), f))
            .rem(&u.b, f)?
    };
    let a1: Vec<Poly> = hat
        .iter()
        .zip(alpha)
        .map(|(h, al)| {
            let v = h.mul_poly(&b1, f).sub(al, f);
            if v.is_poly() {
                Ok(v.num().clone())
            } else {
                Err(Error::NotInLattice("α ∉ Λ_u".into()))
            }
        })
        .collect::<Result<_>>()?;
    Ok((a1, b1))
}

/// Pairs `v` in the fiber over `α` with `|v| = q^k |u|`, restricted to primitive ones.
/// With `monic_only`, only the representatives with monic `b_v` are returned (one per
/// `F_q^*`-orbit of the fiber over the orbit of `α`).
pub fn fiber(u: &ApproxPair, alpha: &[RatFn], k: u32, monic_only: bool, f: &Field) -> Result<Vec<ApproxPair>> {
    let (a1, b1) = pi_preimage(u, alpha, f)?;
    let q = f.q();
    let mut out = Vec::new();
    let lc_b0 = u.b.lc();
    for s in Poly::of_degree(k as usize, q) {
        if monic_only && f.mul(s.lc(), lc_b0) != 1 {
            continue;
        }
        let b = b1.add(&u.b.mul(&s, f), f);
        let a: Vec<Poly> = a1.iter().zip(&u.a).map(|(x, y)| x.add(&y.mul(&s, f), f)).collect();
        let v = ApproxPair { a, b };
        if v.is_primitive(f) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Size of the primitive part of the fiber (all orbit members).
pub fn fiber_count(u: &ApproxPair, alpha: &[RatFn], k: u32, f: &Field) -> Result<usize> {
    Ok(fiber(u, alpha, k, false, f)?.len())
}

/// Oracle: all primitive `v` with `deg b_v = deg u + k` and `π_u(v) = α`, by scanning `b_v`.
pub fn fiber_exhaustive(u: &ApproxPair, alpha: &[RatFn], k: u32, f: &Field) -> Vec<ApproxPair> {
    let hat = u.hat(f);
    let deg = (u.deg() + k as i64) as usize;
    let mut out = Vec::new();
    for b in Poly::of_degree(deg, f.q()) {
        let mut a = Vec::with_capacity(u.d());
        let mut ok = true;
        for (h, al) in hat.iter().zip(alpha) {
            let v = h.mul_poly(&b, f).sub(al, f);
            if !v.is_poly() {
                ok = false;
                break;
            }
            a.push(v.num().clone());
        }
        if ok {
            let v = ApproxPair { a, b };
            if v.is_primitive(f) {
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::farey::farey_lattice;

    #[test]
    fn fiber_matches_scan() {
        let f = Field::of_order(2).unwrap();
        let u = ApproxPair::new(vec![Poly::one(), Poly::x()], Poly::from_coeffs([1, 1, 1]), &f).unwrap();
        let fl = farey_lattice(&u, &f);
        let alpha = fl.xi(0, &f);
        for k in 0..3 {
            let mut a = fiber(&u, &alpha, k, false, &f).unwrap();
            let mut b = fiber_exhaustive(&u, &alpha, k, &f);
            a.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
            b.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
            assert_eq!(a, b);
            assert_eq!(a.len(), 1 << k);
        }
    }
}
