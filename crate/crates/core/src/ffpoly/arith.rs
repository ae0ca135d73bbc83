//! Arithmetic functions on F_q[x]: the totient φ and the divisor sum D₁.
//!
//! `φ(f) = #{g ≠ 0 : deg g < deg f, gcd(f, g) = 1}` and `D₁(f) = Σ_{g | f, g monic} |g|`.

use super::factor::{factor, Factorization};
use super::field::Field;
use super::poly::Poly;
use crate::error::{Error, Result};

fn checked_pow(base: u128, e: u64) -> Result<u128> {
    let mut r: u128 = 1;
    for _ in 0..e {
        r = r
            .checked_mul(base)
            .ok_or_else(|| Error::TooLarge("integer overflow in arithmetic function".into()))?;
    }
    Ok(r)
}

fn abs_of(p: &Poly, f: &Field) -> Result<u128> {
    checked_pow(f.q() as u128, p.deg().max(0) as u64)
}

/// `φ(f) = Π (|P|^e - |P|^{e-1})` over the factorisation.
pub fn euler_phi_from(fact: &Factorization, f: &Field) -> Result<u128> {
    fact.iter().try_fold(1u128, |acc, (p, e)| {
        let norm = abs_of(p, f)?;
        let t = checked_pow(norm, *e as u64 - 1)? * (norm - 1);
        acc.checked_mul(t).ok_or_else(|| Error::TooLarge("phi overflow".into()))
    })
}

/// Euler totient of a polynomial of degree at least 1.
pub fn euler_phi(g: &Poly, f: &Field) -> Result<u128> {
    if g.deg() < 1 {
        return Err(Error::NonConstantRequired);
    }
    euler_phi_from(&factor(g, f)?, f)
}

/// `D₁(f) = Π (|P|^{e+1} - 1)/(|P| - 1)`; equals 1 on nonzero constants.
pub fn divisor_sum_d1_from(fact: &Factorization, f: &Field) -> Result<u128> {
    fact.iter().try_fold(1u128, |acc, (p, e)| {
        let norm = abs_of(p, f)?;
        let t = (checked_pow(norm, *e as u64 + 1)? - 1) / (norm - 1);
        acc.checked_mul(t).ok_or_else(|| Error::TooLarge("D1 overflow".into()))
    })
}

pub fn divisor_sum_d1(g: &Poly, f: &Field) -> Result<u128> {
    if g.is_zero() {
        return Err(Error::DivisionByZero);
    }
    divisor_sum_d1_from(&factor(g, f)?, f)
}

/// φ extended by `φ(c) = 0` on nonzero constants (no nonzero `g` has negative degree).
pub fn euler_phi_or_zero(g: &Poly, f: &Field) -> Result<u128> {
    if g.deg() == 0 {
        Ok(0)
    } else {
        euler_phi(g, f)
    }
}

/// `Σ_{deg f = ℓ} φ(f) = (q-1)²/q · q^{2ℓ}` over all (not only monic) `f` of degree `ℓ >= 1`.
pub fn phi_degree_sum_closed(q: u32, l: u32) -> Result<u128> {
    if l == 0 {
        return Err(Error::OutOfRange("degree must be >= 1".into()));
    }
    let q = q as u128;
    Ok((q - 1) * (q - 1) * checked_pow(q, 2 * l as u64 - 1)?)
}

/// `(q-1) q^{3ℓ}`, the upper bound for `Σ_{deg f = ℓ} φ(f) D₁(f)`.
pub fn phi_d1_degree_bound(q: u32, l: u32) -> Result<u128> {
    Ok((q as u128 - 1) * checked_pow(q as u128, 3 * l as u64)?)
}

/// Direct count of units modulo `g` (oracle).
pub fn euler_phi_direct(g: &Poly, f: &Field) -> u128 {
    Poly::nonzero_up_to_degree(g.deg() - 1, f.q())
        .filter(|h| h.gcd(g, f).is_one())
        .count() as u128
}

/// Direct divisor sum over monic divisors (oracle).
pub fn divisor_sum_d1_direct(g: &Poly, f: &Field) -> u128 {
    let q = f.q() as u128;
    (0..=g.deg().max(0) as usize)
        .flat_map(|k| Poly::monic_of_degree(k, f.q()))
        .filter(|h| h.divides(g, f))
        .map(|h| q.pow(h.deg() as u32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[u8]) -> Poly {
        Poly::from_coeffs(c.iter().copied())
    }

    #[test]
    fn documented_values() {
        let f = Field::of_order(2).unwrap();
        assert_eq!(euler_phi(&p(&[0, 0, 1]), &f).unwrap(), 2);
        assert_eq!(euler_phi(&p(&[0, 1, 1]), &f).unwrap(), 1);
        assert_eq!(euler_phi(&p(&[1, 1, 1]), &f).unwrap(), 3);
        assert_eq!(divisor_sum_d1(&p(&[0, 0, 1]), &f).unwrap(), 7);
        assert_eq!(divisor_sum_d1(&p(&[0, 1, 1]), &f).unwrap(), 9);
        assert_eq!(euler_phi(&p(&[1]), &f), Err(Error::NonConstantRequired));
        assert_eq!(phi_degree_sum_closed(2, 1).unwrap(), 2);
        assert_eq!(phi_degree_sum_closed(2, 2).unwrap(), 8);
        assert_eq!(phi_degree_sum_closed(3, 1).unwrap(), 12);
    }

    #[test]
    fn closed_forms_match_direct() {
        for q in [2u32, 3] {
            let f = Field::of_order(q).unwrap();
            for g in Poly::nonzero_up_to_degree(4, q).filter(|g| g.deg() >= 1) {
                assert_eq!(euler_phi(&g, &f).unwrap(), euler_phi_direct(&g, &f));
                assert_eq!(divisor_sum_d1(&g, &f).unwrap(), divisor_sum_d1_direct(&g, &f));
            }
        }
    }
}
