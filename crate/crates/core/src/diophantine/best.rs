//! Best approximations of `θ ∈ F_q((x⁻¹))^d`.
//!
//! With `M(n) = min{A(θ, b) : 1 <= |b| <= q^n}` (the optimal `a` for a given `b` is the
//! polynomial part of `bθ`), degree `n` carries a best approximation exactly when the
//! minimum over `deg b = n` is below `M(n−1)`; the minimiser is then unique up to
//! `F_q^*`. Two routes are provided: a definition-level scan over monic `b`, which
//! works with truncated `θ` and certifies every comparison, and a lattice search for
//! exact rational `θ` that scales to large degrees.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::pair::ApproxPair;
use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::lattice::ReducedLattice;
use crate::laurent::{lvec_norm_bound, LVec, Laurent, NormBound, RatFn};
use crate::qexp::QNorm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestApproxEntry {
    pub u: ApproxPair,
    /// `A(θ, u)`.
    pub quality: NormBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestApproxSeq {
    pub degree_bound: i64,
    pub entries: Vec<BestApproxEntry>,
    /// Set when some `A(θ, u)` is exactly zero: `θ` is rational and the sequence ends.
    pub rational_terminated: bool,
}

impl BestApproxSeq {
    pub fn pairs(&self) -> impl Iterator<Item = &ApproxPair> {
        self.entries.iter().map(|e| &e.u)
    }
}

/// Guard digits used by [`recommended_low`].
pub const GUARD: i64 = 4;

/// Precision floor that certifies every comparison up to degree `bound`:
/// `θ` known to exponent `−(B + dB + GUARD)`.
pub fn recommended_low(bound: i64, d: usize) -> i64 {
    -(bound + d as i64 * bound + GUARD)
}

/// Fractional part of `bθ` and its certified norm.
fn frac_quality(theta: &LVec, b: &Poly, f: &Field) -> Result<(Vec<Poly>, NormBound)> {
    let mut a = Vec::with_capacity(theta.len());
    let mut fr = Vec::with_capacity(theta.len());
    for t in theta {
        let (p, frac) = t.mul_poly(b, f).split(f)?;
        a.push(p);
        fr.push(frac);
    }
    Ok((a, lvec_norm_bound(&fr)))
}

fn is_below(a: &NormBound, b: Option<&NormBound>) -> Result<bool> {
    match b {
        None => Ok(true),
        Some(b) => match a.cmp_certain(b) {
            Some(o) => Ok(o == Ordering::Less),
            None => Err(Error::Precision(format!("cannot rank A-values {a:?} and {b:?}"))),
        },
    }
}

/// Definition-level computation of all best approximations with `deg b <= bound`.
///
/// Every ranking decision is certified from the known digits of `θ`; an undecidable
/// comparison raises [`Error::Precision`] instead of guessing.
pub fn best_approx_sequence(theta: &LVec, bound: i64, f: &Field) -> Result<BestApproxSeq> {
    if theta.is_empty() {
        return Err(Error::Dimension("θ must have d >= 1 entries".into()));
    }
    let mut entries: Vec<BestApproxEntry> = Vec::new();
    let mut prefix_min: Option<NormBound> = None;
    let mut rational_terminated = false;
    for n in 0..=bound.max(0) as usize {
        let mut level_best: Option<(Vec<Poly>, Poly, NormBound)> = None;
        for b in Poly::monic_of_degree(n, f.q()) {
            let (a, qa) = frac_quality(theta, &b, f)?;
            let better = match &level_best {
                None => true,
                Some((_, _, cur)) => match qa.cmp_certain(cur) {
                    Some(o) => o == Ordering::Less,
                    // two candidates both zero to precision: the level minimum is not certified
                    None => {
                        return Err(Error::Precision(format!("cannot rank A-values at degree {n}")))
                    }
                },
            };
            if better {
                level_best = Some((a, b, qa));
            }
        }
        let (a, b, qa) = level_best.expect("at least one monic polynomial");
        if is_below(&qa, prefix_min.as_ref())? {
            let u = ApproxPair { a, b };
            entries.push(BestApproxEntry { u, quality: qa });
            prefix_min = Some(qa);
            if qa == NormBound::Exact(QNorm::ZERO) {
                rational_terminated = true;
                break;
            }
        }
    }
    Ok(BestApproxSeq { degree_bound: bound, entries, rational_terminated })
}

/// The lattice `{(x^{-β}(bθ − a), x^{-s} b)}` in `K^{d+1}`, reduced.
fn weighted_lattice(theta: &[RatFn], beta: i64, s: i64, f: &Field) -> ReducedLattice {
    let d = theta.len();
    // common denominator of θ times x^s
    let g = theta.iter().fold(Poly::one(), |acc, t| acc.lcm(t.den(), f));
    let den = g.shift(s as usize);
    let scale = Poly::monomial(1, (-beta) as usize); // x^{-β}, β <= -1
    let mut cols: Vec<Vec<Poly>> = Vec::with_capacity(d + 1);
    for j in 0..d {
        let mut c = vec![Poly::zero(); d + 1];
        c[j] = scale.mul(&den, f).neg(f);
        cols.push(c);
    }
    let mut last: Vec<Poly> = theta
        .iter()
        .map(|t| {
            let mult = den.exact_div(t.den(), f).unwrap();
            t.num().mul(&mult, f).mul(&scale, f)
        })
        .collect();
    last.push(g.clone());
    cols.push(last);
    ReducedLattice::from_poly_generators(den, cols, f).expect("nonzero denominator")
}

/// Best approximations of an exact rational `θ` by lattice search: for each degree
/// `s`, `M(s) <= q^β` iff the weighted lattice has a nonzero vector of norm `<= 1`.
pub fn best_approx_sequence_exact(theta: &[RatFn], bound: i64, f: &Field) -> Result<BestApproxSeq> {
    if theta.is_empty() {
        return Err(Error::Dimension("θ must have d >= 1 entries".into()));
    }
    let g = theta.iter().fold(Poly::one(), |acc, t| acc.lcm(t.den(), f));
    let floor = -g.deg() - 1; // nonzero A-values are >= |g|^{-1}
    let mut entries = Vec::new();
    let mut prev: Option<QNorm> = None;
    let mut rational_terminated = false;
    for s in 0..=bound.max(0) {
        // smallest β in [floor, -1] with a short vector; β = floor means A = 0
        let has_short = |beta: i64| weighted_lattice(theta, beta, s, f).lambda1_exp() <= 0;
        let (mut lo, mut hi) = (floor, -1);
        if !has_short(hi) {
            // cannot happen: A(θ, 1) <= q^{-1}
            return Err(Error::Singular("no approximation below q^-1".into()));
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if has_short(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let m = if hi == floor { QNorm::ZERO } else { QNorm::pow(hi) };
        if prev.is_none_or(|p| m < p) {
            let red = weighted_lattice(theta, hi, s, f);
            let v = red.xi(0, f);
            // v = (x^{-β}(bθ − a), x^{-s} b)
            let b = v[theta.len()].mul_poly(&Poly::monomial(1, s as usize), f);
            if !b.is_poly() {
                return Err(Error::Singular("unexpected shortest vector".into()));
            }
            let b = b.num().clone();
            let a: Vec<Poly> = theta.iter().map(|t| t.mul_poly(&b, f).poly_part(f)).collect();
            let u = ApproxPair { a, b }.canonical(f);
            let quality = super::pair::approx_quality_exact(theta, &u, f);
            debug_assert_eq!(quality, m);
            entries.push(BestApproxEntry { u, quality: NormBound::Exact(quality) });
            prev = Some(m);
            if m.is_zero() {
                rational_terminated = true;
                break;
            }
        }
    }
    Ok(BestApproxSeq { degree_bound: bound, entries, rational_terminated })
}

/// Exact θ as a Laurent vector with the recommended precision for `bound`.
pub fn theta_from_ratfns(theta: &[RatFn], bound: i64, f: &Field) -> LVec {
    let low = recommended_low(bound, theta.len());
    theta.iter().map(|t| Laurent::from_ratfn(t, low, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_sequence() {
        // θ = (x^2+1)/x^3 = x^-1 + x^-3 in d = 1, q = 2
        let f = Field::of_order(2).unwrap();
        let t = RatFn::new(Poly::from_coeffs([1, 0, 1]), Poly::monomial(1, 3), &f).unwrap();
        let theta = theta_from_ratfns(std::slice::from_ref(&t), 3, &f);
        let seq = best_approx_sequence(&theta, 3, &f).unwrap();
        let bs: Vec<i64> = seq.entries.iter().map(|e| e.u.deg()).collect();
        let qs: Vec<NormBound> = seq.entries.iter().map(|e| e.quality).collect();
        assert_eq!(bs, vec![0, 1, 2, 3]);
        assert_eq!(qs, vec![
            NormBound::Exact(QNorm::pow(-1)),
            NormBound::Exact(QNorm::pow(-2)),
            NormBound::Exact(QNorm::pow(-3)),
            NormBound::Exact(QNorm::ZERO)
        ]);
        assert_eq!(seq.entries[2].u.a, vec![Poly::x()]);
        assert_eq!(seq.entries[3].u.a, vec![Poly::from_coeffs([1, 0, 1])]);
        assert!(seq.rational_terminated);
        let exact = best_approx_sequence_exact(&[t], 3, &f).unwrap();
        assert_eq!(exact, seq);
    }

    #[test]
    fn insufficient_precision_is_an_error() {
        let f = Field::of_order(2).unwrap();
        let theta = vec![Laurent::from_digits(-1, vec![1, 0])];
        assert!(matches!(best_approx_sequence(&theta, 3, &f), Err(Error::Precision(_))));
    }
}
