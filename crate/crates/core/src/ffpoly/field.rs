//! Finite fields F_q, q = p^k, realised as F_p[y]/(modulus) with table arithmetic.
//!
//! Elements are indices `0..q`; index `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` stands for
//! `c_0 + c_1 y + ... + c_{k-1} y^{k-1}`. Index order is the fixed total order on F_q
//! used by every enumeration in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element (index into the tables). `q <= 256` keeps this a byte.
pub type Fe = u8;

/// Largest supported field size; arithmetic is table driven.
pub const MAX_Q: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    /// Coefficients (low to high, over F_p) of the monic irreducible modulus of degree `k`.
    /// Optional for `k = 1`; for `k > 1` a default is chosen when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    pub fn prime(p: u32) -> Self {
        FieldSpec { p, k: 1, modulus: None }
    }

    /// The field of order `q`, using the default modulus when `q` is a proper prime power.
    pub fn of_order(q: u32) -> Result<Self> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        Ok(FieldSpec { p, k, modulus: None })
    }

    pub fn q(&self) -> u32 {
        self.p.saturating_pow(self.k)
    }
}

#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    p: u32,
    k: u32,
    q: u32,
    add: Vec<Fe>,
    mul: Vec<Fe>,
    neg: Vec<Fe>,
    inv: Vec<Fe>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Decomposes `q = p^k` with `p` prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut m, mut k) = (q, 0);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

/// Multiplies two F_p-polynomials (low to high) and reduces modulo the monic `modulus`.
fn mulmod_fp(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for top in (k..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        for (t, &m) in modulus.iter().enumerate() {
            let idx = top - k + t;
            prod[idx] = (prod[idx] + (p - c) * m) % p;
        }
    }
    prod.truncate(k);
    prod.resize(k, 0);
    prod
}

fn digits(mut e: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = e % p;
            e /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Lexicographically first monic irreducible of degree `k` over F_p (by brute force).
fn default_modulus(p: u32, k: u32) -> Result<Vec<u32>> {
    let fp = Field::new(FieldSpec::prime(p))?;
    let count = p.pow(k);
    for low in 0..count {
        let mut m = digits(low, p, k);
        m.push(1);
        if is_irreducible_fp(&fp, &m) {
            return Ok(m);
        }
    }
    Err(Error::InvalidField(format!("no irreducible of degree {k} over F_{p}")))
}

fn is_irreducible_fp(fp: &Field, m: &[u32]) -> bool {
    use super::poly::Poly;
    let f = Poly::from_coeffs(m.iter().map(|&c| c as Fe));
    super::factor::is_irreducible(&f, fp)
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let FieldSpec { p, k, .. } = spec;
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if k == 0 {
            return Err(Error::InvalidField("k must be >= 1".into()));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| Error::InvalidField(format!("q = {p}^{k} exceeds {MAX_Q}")))?;
        let modulus: Vec<u32> = if k == 1 {
            vec![0, 1]
        } else {
            match &spec.modulus {
                Some(m) => {
                    if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&c| c >= p) {
                        return Err(Error::InvalidField(format!(
                            "modulus must be monic of degree {k} with coefficients in F_{p}"
                        )));
                    }
                    let fp = Field::new(FieldSpec::prime(p))?;
                    if !is_irreducible_fp(&fp, m) {
                        return Err(Error::InvalidField("modulus is reducible".into()));
                    }
                    m.clone()
                }
                None => default_modulus(p, k)?,
            }
        };
        let qu = q as usize;
        let mut add = vec![0; qu * qu];
        let mut mul = vec![0; qu * qu];
        let ds: Vec<Vec<u32>> = (0..q).map(|e| digits(e, p, k)).collect();
        for a in 0..qu {
            for b in 0..qu {
                let s: Vec<u32> = ds[a].iter().zip(&ds[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * qu + b] = undigits(&s, p) as Fe;
                let m = if k == 1 {
                    vec![(ds[a][0] * ds[b][0]) % p]
                } else {
                    mulmod_fp(&ds[a], &ds[b], &modulus, p)
                };
                mul[a * qu + b] = undigits(&m, p) as Fe;
            }
        }
        let mut neg = vec![0; qu];
        let mut inv = vec![0; qu];
        for a in 0..qu {
            neg[a] = (0..qu).find(|&b| add[a * qu + b] == 0).unwrap() as Fe;
            if a != 0 {
                inv[a] = (1..qu)
                    .find(|&b| mul[a * qu + b] == 1)
                    .ok_or_else(|| Error::InvalidField("modulus does not give a field".into()))?
                    as Fe;
            }
        }
        let spec = FieldSpec { p, k, modulus: (k > 1).then_some(modulus) };
        Ok(Field { spec, p, k, q, add, mul, neg, inv })
    }

    /// Convenience constructor for `F_q` with the default modulus.
    pub fn of_order(q: u32) -> Result<Self> {
        Field::new(FieldSpec::of_order(q)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.add[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.mul[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }
    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: Fe) -> Fe {
        debug_assert!(a != 0, "inverse of zero");
        self.inv[a as usize]
    }
    #[inline]
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, mut a: Fe, mut e: u64) -> Fe {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Inverse Frobenius: the unique `b` with `b^p = a`.
    pub fn pth_root(&self, a: Fe) -> Fe {
        // b = a^(q/p) since a^q = a.
        self.pow(a, (self.q / self.p) as u64)
    }

    /// The integer `n` reduced into the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(self.p as i64) as Fe
    }

    /// Checks an externally supplied element index.
    pub fn element(&self, n: u32) -> Result<Fe> {
        if n < self.q {
            Ok(n as Fe)
        } else {
            Err(Error::InvalidField(format!("element index {n} >= q = {}", self.q)))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.q).map(|e| e as Fe)
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> {
        (1..self.q).map(|e| e as Fe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for spec in [
            FieldSpec::prime(2),
            FieldSpec::prime(3),
            FieldSpec::prime(5),
            FieldSpec { p: 2, k: 2, modulus: Some(vec![1, 1, 1]) },
            FieldSpec { p: 3, k: 2, modulus: None },
            FieldSpec { p: 2, k: 3, modulus: None },
        ] {
            let f = Field::new(spec).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    assert_eq!(f.pow(a, f.q() as u64 - 1), 1);
                }
                assert_eq!(f.pow(f.pth_root(a), f.p() as u64), a);
                for b in f.elements() {
                    for c in f.elements() {
                        let l = f.mul(a, f.add(b, c));
                        let r = f.add(f.mul(a, b), f.mul(a, c));
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // y^2 + 1 = (y + 1)^2 over F_2
        let err = Field::new(FieldSpec { p: 2, k: 2, modulus: Some(vec![1, 0, 1]) });
        assert!(matches!(err, Err(Error::InvalidField(_))));
        assert!(Field::new(FieldSpec::prime(4)).is_err());
        assert!(Field::of_order(6).is_err());
        assert_eq!(Field::of_order(4).unwrap().q(), 4);
    }
}
