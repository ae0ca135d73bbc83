//! Dense univariate polynomials over F_q.
//!
//! Coefficients are stored low to high with no trailing zeros, so the zero
//! polynomial is the empty vector. Arithmetic takes the field explicitly.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::field::{Fe, Field};
use crate::error::{Error, Result};
use crate::qexp::QNorm;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly(SmallVec<[Fe; 16]>);

impl Poly {
    pub fn zero() -> Self {
        Poly(SmallVec::new())
    }
    pub fn one() -> Self {
        Poly::constant(1)
    }
    pub fn x() -> Self {
        Poly::monomial(1, 1)
    }
    pub fn constant(c: Fe) -> Self {
        Poly::from_coeffs([c])
    }
    pub fn monomial(c: Fe, k: usize) -> Self {
        if c == 0 {
            return Poly::zero();
        }
        let mut v = SmallVec::from_elem(0, k + 1);
        v[k] = c;
        Poly(v)
    }

    /// Builds from coefficients listed low to high; trailing zeros are dropped.
    pub fn from_coeffs<I: IntoIterator<Item = Fe>>(cs: I) -> Self {
        let mut p = Poly(cs.into_iter().collect());
        p.trim();
        p
    }

    /// The polynomial with base-`q` digit expansion `idx` (constant term least significant).
    /// Index order coincides with [`Ord`] on polynomials.
    pub fn from_index(mut idx: u64, q: u32) -> Self {
        let mut v = SmallVec::new();
        while idx > 0 {
            v.push((idx % q as u64) as Fe);
            idx /= q as u64;
        }
        Poly(v)
    }

    pub fn index(&self, q: u32) -> u64 {
        self.0.iter().rev().fold(0u64, |acc, &c| acc * q as u64 + c as u64)
    }

    #[inline]
    fn trim(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.0
    }
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0] == 1
    }
    /// Degree, `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }
    /// Degree as a signed integer with `deg 0 = -1`; handy for bounds like `deg < n`.
    #[inline]
    pub fn deg(&self) -> i64 {
        self.0.len() as i64 - 1
    }
    /// `|f| = q^deg f`.
    pub fn norm(&self) -> QNorm {
        QNorm::from_opt(self.degree().map(|d| d as i64))
    }
    #[inline]
    pub fn coeff(&self, i: usize) -> Fe {
        self.0.get(i).copied().unwrap_or(0)
    }
    /// Leading coefficient (0 for the zero polynomial).
    #[inline]
    pub fn lc(&self) -> Fe {
        self.0.last().copied().unwrap_or(0)
    }
    pub fn is_monic(&self) -> bool {
        self.lc() == 1
    }
    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn add(&self, o: &Poly, f: &Field) -> Poly {
        let (long, short) = if self.0.len() >= o.0.len() { (self, o) } else { (o, self) };
        let mut v = long.0.clone();
        for (i, &c) in short.0.iter().enumerate() {
            v[i] = f.add(v[i], c);
        }
        let mut p = Poly(v);
        p.trim();
        p
    }

    pub fn neg(&self, f: &Field) -> Poly {
        Poly(self.0.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn sub(&self, o: &Poly, f: &Field) -> Poly {
        let n = self.0.len().max(o.0.len());
        let mut v: SmallVec<[Fe; 16]> = SmallVec::with_capacity(n);
        for i in 0..n {
            v.push(f.sub(self.coeff(i), o.coeff(i)));
        }
        let mut p = Poly(v);
        p.trim();
        p
    }

    pub fn scale(&self, c: Fe, f: &Field) -> Poly {
        if c == 0 {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut v = SmallVec::from_elem(0, k);
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    pub fn mul(&self, o: &Poly, f: &Field) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v: SmallVec<[Fe; 16]> = SmallVec::from_elem(0, self.0.len() + o.0.len() - 1);
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        // Product of nonzero leading coefficients is nonzero: no trim needed.
        Poly(v)
    }

    /// In place `self -= c * x^k * o`.
    pub fn sub_scaled_shift(&mut self, o: &Poly, c: Fe, k: usize, f: &Field) {
        if c == 0 || o.is_zero() {
            return;
        }
        let need = o.0.len() + k;
        if self.0.len() < need {
            self.0.resize(need, 0);
        }
        let nc = f.neg(c);
        for (j, &b) in o.0.iter().enumerate() {
            if b != 0 {
                self.0[j + k] = f.add(self.0[j + k], f.mul(nc, b));
            }
        }
        self.trim();
    }

    pub fn div_rem(&self, d: &Poly, f: &Field) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let mut r = self.clone();
        if r.0.len() <= dd {
            return Ok((Poly::zero(), r));
        }
        let inv = f.inv(d.lc());
        let mut qv: SmallVec<[Fe; 16]> = SmallVec::from_elem(0, r.0.len() - dd);
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let c = f.mul(r.lc(), inv);
            qv[rd - dd] = c;
            r.sub_scaled_shift(d, c, rd - dd, f);
        }
        let mut q = Poly(qv);
        q.trim();
        Ok((q, r))
    }

    pub fn rem(&self, d: &Poly, f: &Field) -> Result<Poly> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let mut r = self.clone();
        let inv = f.inv(d.lc());
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let c = f.mul(r.lc(), inv);
            r.sub_scaled_shift(d, c, rd - dd, f);
        }
        Ok(r)
    }

    /// Quotient when `d` is known to divide `self`.
    pub fn exact_div(&self, d: &Poly, f: &Field) -> Result<Poly> {
        let (q, r) = self.div_rem(d, f)?;
        if !r.is_zero() {
            return Err(Error::Singular("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn divides(&self, g: &Poly, f: &Field) -> bool {
        !self.is_zero() && g.rem(self, f).map(|r| r.is_zero()).unwrap_or(false)
    }

    pub fn monic(&self, f: &Field) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f.inv(self.lc()), f)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Poly, f: &Field) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Extended gcd: returns `(g, s, t)` with `g = s*self + t*o` and `g` monic.
    pub fn xgcd(&self, o: &Poly, f: &Field) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1, f).expect("nonzero divisor");
            let s = s0.sub(&q.mul(&s1, f), f);
            let t = t0.sub(&q.mul(&t1, f), f);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let c = f.inv(r0.lc());
        (r0.scale(c, f), s0.scale(c, f), t0.scale(c, f))
    }

    pub fn lcm(&self, o: &Poly, f: &Field) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(o, f);
        self.exact_div(&g, f).unwrap().mul(o, f).monic(f)
    }

    pub fn derivative(&self, f: &Field) -> Poly {
        let v = self.0.iter().enumerate().skip(1).map(|(i, &c)| {
            // i * c with i reduced mod p, computed as repeated addition in the prime field
            f.mul(f.from_int(i as i64), c)
        });
        Poly::from_coeffs(v)
    }

    pub fn pow_mod(&self, mut e: u128, m: &Poly, f: &Field) -> Result<Poly> {
        let mut base = self.rem(m, f)?;
        let mut r = Poly::one().rem(m, f)?;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base, f).rem(m, f)?;
            }
            base = base.mul(&base, f).rem(m, f)?;
            e >>= 1;
        }
        Ok(r)
    }

    pub fn pow(&self, e: u32, f: &Field) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self, f))
    }

    pub fn eval(&self, x: Fe, f: &Field) -> Fe {
        self.0.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Truncation to the terms of degree `< k`.
    pub fn truncate(&self, k: usize) -> Poly {
        Poly::from_coeffs(self.0.iter().take(k).copied())
    }

    /// Terms of degree `>= k`, divided by `x^k`.
    pub fn high_part(&self, k: usize) -> Poly {
        Poly::from_coeffs(self.0.iter().skip(k).copied())
    }

    /// Iterator over all polynomials of degree at most `n` (including 0), in [`Ord`] order.
    pub fn up_to_degree(n: i64, q: u32) -> impl Iterator<Item = Poly> {
        let count = if n < 0 { 1 } else { (q as u64).pow(n as u32 + 1) };
        (0..count).map(move |i| Poly::from_index(i, q))
    }

    /// Iterator over all polynomials of exact degree `n`.
    pub fn of_degree(n: usize, q: u32) -> impl Iterator<Item = Poly> {
        let lo = (q as u64).pow(n as u32);
        (lo..lo * q as u64).map(move |i| Poly::from_index(i, q))
    }

    /// Iterator over all monic polynomials of degree `n`.
    pub fn monic_of_degree(n: usize, q: u32) -> impl Iterator<Item = Poly> {
        let lo = (q as u64).pow(n as u32);
        (lo..2 * lo).map(move |i| Poly::from_index(i, q))
    }

    /// Iterator over all nonzero polynomials of degree at most `n`.
    pub fn nonzero_up_to_degree(n: i64, q: u32) -> impl Iterator<Item = Poly> {
        Poly::up_to_degree(n, q).skip(1)
    }
}

/// Monic gcd of a list of polynomials.
pub fn gcd_all<'a, I: IntoIterator<Item = &'a Poly>>(ps: I, f: &Field) -> Poly {
    ps.into_iter().fold(Poly::zero(), |g, p| g.gcd(p, f))
}

impl Ord for Poly {
    /// Degree first, then coefficients from the top down.
    fn cmp(&self, o: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&o.0.len())
            .then_with(|| self.0.iter().rev().cmp(o.0.iter().rev()))
    }
}
impl PartialOrd for Poly {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(fm, "0");
        }
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(fm, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(fm, "{c}")?,
                (1, 1) => write!(fm, "x")?,
                (1, c) => write!(fm, "{c}x")?,
                (i, 1) => write!(fm, "x^{i}")?,
                (i, c) => write!(fm, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Poly({self})")
    }
}

impl serde::Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> serde::Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<u32> = Vec::deserialize(d)?;
        if v.iter().any(|&c| c >= super::field::MAX_Q) {
            return Err(serde::de::Error::custom("coefficient out of range"));
        }
        Ok(Poly::from_coeffs(v.into_iter().map(|c| c as Fe)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[Fe]) -> Poly {
        Poly::from_coeffs(c.iter().copied())
    }

    #[test]
    fn gcd_example() {
        let f = Field::of_order(2).unwrap();
        // gcd(x^2+1, x+1) = x+1 over F_2
        assert_eq!(p(&[1, 0, 1]).gcd(&p(&[1, 1]), &f), p(&[1, 1]));
    }

    #[test]
    fn div_rem_and_xgcd() {
        let f = Field::of_order(3).unwrap();
        for a in Poly::up_to_degree(3, 3) {
            for b in Poly::nonzero_up_to_degree(2, 3) {
                let (q, r) = a.div_rem(&b, &f).unwrap();
                assert!(r.deg() < b.deg());
                assert_eq!(q.mul(&b, &f).add(&r, &f), a);
                let (g, s, t) = a.xgcd(&b, &f);
                assert_eq!(s.mul(&a, &f).add(&t.mul(&b, &f), &f), g);
                assert!(g.divides(&a, &f) || a.is_zero());
                assert!(g.divides(&b, &f));
            }
        }
    }

    #[test]
    fn index_order_matches_ord() {
        let all: Vec<Poly> = Poly::up_to_degree(3, 3).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(3), i as u64);
        }
        assert_eq!(Poly::monic_of_degree(2, 3).count(), 9);
        assert_eq!(Poly::of_degree(2, 3).count(), 18);
    }

    #[test]
    fn sub_scaled_shift_matches_mul() {
        let f = Field::of_order(4).unwrap();
        let a = p(&[1, 2, 3, 1]);
        let b = p(&[3, 1]);
        let mut c = a.clone();
        c.sub_scaled_shift(&b, 2, 2, &f);
        let expect = a.sub(&b.mul(&Poly::monomial(2, 2), &f), &f);
        assert_eq!(c, expect);
    }
}
