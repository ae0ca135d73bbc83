//! Factorisation over F_q: square-free decomposition, distinct-degree and
//! deterministic equal-degree splitting, with trial division as a fallback.

use num_bigint::BigUint;
use num_traits::One;

use super::field::Field;
use super::poly::Poly;
use crate::error::{Error, Result};

/// Monic irreducible factors with multiplicities, sorted by [`Ord`] on the factor.
pub type Factorization = Vec<(Poly, u32)>;

/// Equal-degree splitting tries this many trial polynomials before falling back.
const EDF_TRIALS: u64 = 4096;

fn frobenius(h: &Poly, m: &Poly, f: &Field) -> Poly {
    h.pow_mod(f.q() as u128, m, f).expect("nonzero modulus")
}

fn pow_mod_big(h: &Poly, e: &BigUint, m: &Poly, f: &Field) -> Poly {
    let mut r = Poly::one().rem(m, f).unwrap();
    let mut base = h.rem(m, f).unwrap();
    for i in 0..e.bits() {
        if e.bit(i) {
            r = r.mul(&base, f).rem(m, f).unwrap();
        }
        base = base.mul(&base, f).rem(m, f).unwrap();
    }
    r
}

/// Rabin's test.
pub fn is_irreducible(g: &Poly, f: &Field) -> bool {
    let n = match g.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let m = g.monic(f);
    let x = Poly::x();
    // powers[i] = x^(q^i) mod m
    let mut powers = vec![x.clone()];
    for i in 1..=n {
        let next = frobenius(&powers[i - 1], &m, f);
        powers.push(next);
    }
    if powers[n] != x.rem(&m, f).unwrap() {
        return false;
    }
    let mut r = 2;
    let mut nn = n;
    let mut primes = Vec::new();
    while nn > 1 {
        if nn % r == 0 {
            primes.push(r);
            while nn % r == 0 {
                nn /= r;
            }
        }
        r += 1;
    }
    primes.into_iter().all(|r| {
        let t = powers[n / r].sub(&x, f);
        m.gcd(&t, f).is_one()
    })
}

fn pth_root_poly(c: &Poly, f: &Field) -> Poly {
    let p = f.p() as usize;
    Poly::from_coeffs(
        c.coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| i % p == 0)
            .map(|(_, &a)| f.pth_root(a)),
    )
}

/// Square-free decomposition of a monic polynomial: `f = prod g_i^{e_i}` with `g_i` square-free.
pub fn squarefree(fm: &Poly, f: &Field) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if fm.deg() < 1 {
        return out;
    }
    let d = fm.derivative(f);
    let mut c = fm.gcd(&d, f);
    let mut w = fm.exact_div(&c, f).unwrap();
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c, f);
        let fac = w.exact_div(&y, f).unwrap();
        if !fac.is_one() {
            out.push((fac, i));
        }
        i += 1;
        w = y;
        c = c.exact_div(&w, f).unwrap();
    }
    if !c.is_one() {
        let root = pth_root_poly(&c, f);
        for (g, e) in squarefree(&root, f) {
            out.push((g, e * f.p()));
        }
    }
    out
}

/// Distinct-degree factorisation of a monic square-free polynomial.
pub fn distinct_degree(g: &Poly, f: &Field) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let mut rest = g.clone();
    let x = Poly::x();
    let mut h = x.clone();
    let mut i = 1;
    while rest.deg() >= 2 * i as i64 {
        h = frobenius(&h, &rest, f);
        let t = h.sub(&x, f);
        let d = rest.gcd(&t, f);
        if !d.is_one() {
            rest = rest.exact_div(&d, f).unwrap();
            h = h.rem(&rest, f).unwrap();
            out.push((d, i));
        }
        i += 1;
    }
    if rest.deg() >= 1 {
        let n = rest.deg() as usize;
        out.push((rest, n));
    }
    out
}

fn split_candidate(g: &Poly, h: &Poly, i: usize, f: &Field) -> Poly {
    let t = if f.p() == 2 {
        // absolute trace to F_2 of h, over the extension of degree k*i
        let m = f.k() as usize * i;
        let mut acc = Poly::zero();
        let mut cur = h.rem(g, f).unwrap();
        for _ in 0..m {
            acc = acc.add(&cur, f);
            cur = cur.mul(&cur, f).rem(g, f).unwrap();
        }
        acc
    } else {
        let e = (BigUint::from(f.q()).pow(i as u32) - BigUint::one()) >> 1;
        pow_mod_big(h, &e, g, f).sub(&Poly::one(), f)
    };
    g.gcd(&t, f)
}

/// Splits a monic square-free product of irreducibles of degree `i`.
pub fn equal_degree(g: &Poly, i: usize, f: &Field) -> Vec<Poly> {
    let n = g.deg() as usize;
    if n == i {
        return vec![g.clone()];
    }
    let q = f.q() as u64;
    let total = (q as f64).powi(n as i32).min(u64::MAX as f64) as u64;
    for idx in (q..total).take(EDF_TRIALS as usize) {
        let h = Poly::from_index(idx, f.q());
        let d = split_candidate(g, &h, i, f);
        if d.deg() > 0 && d.deg() < n as i64 {
            let e = g.exact_div(&d, f).unwrap();
            let mut out = equal_degree(&d, i, f);
            out.extend(equal_degree(&e, i, f));
            return out;
        }
    }
    trial_split(g, i, f)
}

fn trial_split(g: &Poly, i: usize, f: &Field) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut rest = g.clone();
    for cand in Poly::monic_of_degree(i, f.q()) {
        if rest.deg() < i as i64 {
            break;
        }
        if cand.divides(&rest, f) && is_irreducible(&cand, f) {
            rest = rest.exact_div(&cand, f).unwrap();
            out.push(cand);
        }
    }
    out
}

/// Complete factorisation of a nonzero polynomial into monic irreducibles.
pub fn factor(g: &Poly, f: &Field) -> Result<Factorization> {
    if g.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let m = g.monic(f);
    let mut out: Factorization = Vec::new();
    for (sq, e) in squarefree(&m, f) {
        for (block, i) in distinct_degree(&sq, f) {
            for irr in equal_degree(&block, i, f) {
                out.push((irr, e));
            }
        }
    }
    out.sort();
    // A factor can appear in several square-free layers only with distinct exponents after
    // the p-th root step; merge just in case.
    let mut merged: Factorization = Vec::new();
    for (p, e) in out {
        match merged.last_mut() {
            Some((lp, le)) if *lp == p => *le += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(merged)
}

/// Trial-division factorisation (oracle for small degrees).
pub fn factor_trial(g: &Poly, f: &Field) -> Result<Factorization> {
    if g.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let mut rest = g.monic(f);
    let mut out = Vec::new();
    let mut deg = 1;
    while rest.deg() >= 1 {
        if 2 * deg > rest.deg() as usize {
            out.push((rest.clone(), 1));
            break;
        }
        for cand in Poly::monic_of_degree(deg, f.q()) {
            let mut e = 0;
            while cand.divides(&rest, f) {
                rest = rest.exact_div(&cand, f).unwrap();
                e += 1;
            }
            if e > 0 {
                out.push((cand, e));
            }
        }
        deg += 1;
    }
    out.sort();
    let mut merged: Factorization = Vec::new();
    for (p, e) in out {
        match merged.last_mut() {
            Some((lp, le)) if *lp == p => *le += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_matches_trial_division() {
        for q in [2u32, 3, 4, 5] {
            let f = Field::of_order(q).unwrap();
            let maxdeg = if q <= 3 { 7 } else { 4 };
            for g in Poly::nonzero_up_to_degree(maxdeg, q).step_by(7) {
                let a = factor(&g, &f).unwrap();
                let b = factor_trial(&g, &f).unwrap();
                assert_eq!(a, b, "q={q} g={g}");
                let prod = a.iter().fold(Poly::one(), |acc, (p, e)| acc.mul(&p.pow(*e, &f), &f));
                assert_eq!(prod, g.monic(&f));
            }
        }
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree n over F_q (necklace polynomial)
        let f = Field::of_order(2).unwrap();
        let counts: Vec<usize> = (1..=6)
            .map(|n| Poly::monic_of_degree(n, 2).filter(|g| is_irreducible(g, &f)).count())
            .collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9]);
        let f3 = Field::of_order(3).unwrap();
        let c3: Vec<usize> = (1..=4)
            .map(|n| Poly::monic_of_degree(n, 3).filter(|g| is_irreducible(g, &f3)).count())
            .collect();
        assert_eq!(c3, vec![3, 3, 8, 18]);
    }
}
