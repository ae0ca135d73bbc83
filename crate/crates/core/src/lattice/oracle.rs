//! Definition-level oracles that never use the reduction: exhaustive search over
//! coefficient vectors with respect to the *input* basis.
//!
//! Windows come from Cramer's rule and the ultrametric Hadamard inequality: a lattice
//! vector `v = Σ c_i b_i` has `|c_i| <= ‖v‖ · Π_{j≠i} ‖b_j‖ / |det B|`.

use super::{det_exp, LatticeBasis};
use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::laurent::RatFn;
use crate::qexp::QNorm;

/// Default cap on the number of coefficient vectors an oracle may visit.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Degree windows `deg c_i <= w_i` covering every lattice vector of norm `<= q^r`.
pub fn hadamard_windows(basis: &LatticeBasis, r: i64, f: &Field) -> Result<Vec<i64>> {
    let det = det_exp(basis, f)?;
    let norms: Vec<i64> = basis
        .column_norms()
        .iter()
        .map(|n| n.exp().ok_or_else(|| Error::Singular("zero column".into())))
        .collect::<Result<_>>()?;
    let total: i64 = norms.iter().sum();
    Ok(norms.iter().map(|&n| r + total - n - det).collect())
}

fn search_size(windows: &[i64], q: u32) -> Option<u64> {
    windows.iter().try_fold(1u64, |acc, &w| {
        let s = if w < 0 { 1 } else { (q as u64).checked_pow(w as u32 + 1)? };
        acc.checked_mul(s)
    })
}

/// Visits every coefficient vector in the windows, with the numerator `Σ c_i (s b_i)`.
fn for_each_vector<F: FnMut(&[Poly], &[Poly])>(
    basis: &LatticeBasis,
    windows: &[i64],
    budget: u64,
    f: &Field,
    mut visit: F,
) -> Result<()> {
    let q = f.q();
    let size = search_size(windows, q).filter(|&s| s <= budget).ok_or_else(|| {
        Error::TooLarge(format!("coefficient windows {windows:?} exceed the oracle budget"))
    })?;
    let (_, cols) = basis.cleared(f);
    let sizes: Vec<u64> = windows
        .iter()
        .map(|&w| if w < 0 { 1 } else { (q as u64).pow(w as u32 + 1) })
        .collect();
    let d = basis.d;
    for mut idx in 0..size {
        let coeffs: Vec<Poly> = sizes
            .iter()
            .map(|&s| {
                let c = Poly::from_index(idx % s, q);
                idx /= s;
                c
            })
            .collect();
        let mut num = vec![Poly::zero(); d];
        for (c, col) in coeffs.iter().zip(&cols) {
            if !c.is_zero() {
                for (acc, p) in num.iter_mut().zip(col) {
                    *acc = acc.add(&c.mul(p, f), f);
                }
            }
        }
        visit(&coeffs, &num);
    }
    Ok(())
}

fn num_norm(num: &[Poly], sdeg: i64) -> QNorm {
    let m = num.iter().map(Poly::deg).max().unwrap_or(-1);
    if m < 0 {
        QNorm::ZERO
    } else {
        QNorm::pow(m - sdeg)
    }
}

/// Shortest nonzero vector norm by exhaustive search.
pub fn brute_force_shortest(basis: &LatticeBasis, budget: u64, f: &Field) -> Result<QNorm> {
    let r = basis
        .column_norms()
        .into_iter()
        .min()
        .and_then(QNorm::exp)
        .ok_or_else(|| Error::Singular("zero column".into()))?;
    let windows = hadamard_windows(basis, r, f)?;
    let (s, _) = basis.cleared(f);
    let sdeg = s.deg();
    let mut best = QNorm::pow(r);
    for_each_vector(basis, &windows, budget, f, |_, num| {
        let n = num_norm(num, sdeg);
        if !n.is_zero() && n < best {
            best = n;
        }
    })?;
    Ok(best)
}

/// `#(Λ ∩ B(0, q^r))` by exhaustive search.
pub fn brute_force_count(basis: &LatticeBasis, r: i64, budget: u64, f: &Field) -> Result<u64> {
    let windows = hadamard_windows(basis, r, f)?;
    let (s, _) = basis.cleared(f);
    let sdeg = s.deg();
    let mut count = 0;
    for_each_vector(basis, &windows, budget, f, |_, num| {
        if num_norm(num, sdeg) <= QNorm::pow(r) {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Successive minima by exhaustive search: `λ_i` is the least `q^e` such that the ball
/// of radius `q^e` contains `i` linearly independent lattice vectors.
pub fn brute_force_minima(basis: &LatticeBasis, budget: u64, f: &Field) -> Result<Vec<i64>> {
    let r = basis
        .column_norms()
        .into_iter()
        .max()
        .and_then(QNorm::exp)
        .ok_or_else(|| Error::Singular("zero column".into()))?;
    let windows = hadamard_windows(basis, r, f)?;
    let (s, _) = basis.cleared(f);
    let sdeg = s.deg();
    let mut vecs: Vec<(i64, Vec<Poly>)> = Vec::new();
    for_each_vector(basis, &windows, budget, f, |c, num| {
        let n = num_norm(num, sdeg);
        if let Some(e) = n.exp() {
            if e <= r {
                vecs.push((e, c.to_vec()));
            }
        }
    })?;
    vecs.sort_by_key(|v| v.0);
    // greedy independence over F_q(x) on coefficient vectors (same rank as lattice vectors)
    let mut chosen: Vec<Vec<crate::laurent::RatFn>> = Vec::new();
    let mut minima = Vec::new();
    for (e, c) in vecs {
        let v: Vec<_> = c.into_iter().map(crate::laurent::RatFn::from_poly).collect();
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if super::det::rank(&trial, f) > chosen.len() {
            chosen.push(v);
            minima.push(e);
            if minima.len() == basis.d {
                break;
            }
        }
    }
    Ok(minima)
}

/// Digit grid `{Σ_{j=lo}^{hi} c_j x^j}^d`, as numerators over `x^{max(0,−lo)}`.
fn digit_grid(d: usize, lo: i64, hi: i64, budget: u64, f: &Field) -> Result<(usize, Vec<Vec<Poly>>)> {
    let q = f.q() as u64;
    let m = (-lo).max(0) as usize;
    let per = q
        .checked_pow((hi - lo + 1) as u32)
        .filter(|&s| s.checked_pow(d as u32).is_some_and(|t| t <= budget))
        .ok_or_else(|| Error::TooLarge("point grid exceeds the oracle budget".into()))?;
    let entries: Vec<Poly> = (0..per)
        .map(|i| Poly::from_index(i, f.q()).shift((lo + m as i64) as usize))
        .collect();
    let total = per.pow(d as u32);
    let grid = (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let e = entries[(idx % per) as usize].clone();
                    idx /= per;
                    e
                })
                .collect()
        })
        .collect();
    Ok((m, grid))
}

/// Digit range `[lo, hi]` that contains a farthest point: every point is congruent to
/// one of norm `< max ‖b_i‖`, and the farthest distance is at least `|det|^{1/d} / q`.
fn farthest_digit_range(basis: &LatticeBasis, f: &Field) -> Result<(i64, i64)> {
    let hi = basis
        .column_norms()
        .into_iter()
        .max()
        .and_then(QNorm::exp)
        .ok_or_else(|| Error::Singular("zero column".into()))?
        - 1;
    let lo = det_exp(basis, f)?.div_euclid(basis.d as i64) - 2;
    Ok((lo, hi))
}

/// `log_q max_y dist(y, Λ)` by scanning a digit grid of points against every lattice
/// vector that can be closest. Exact whenever the result is at least the grid's lowest
/// digit (distances that large do not depend on the digits below it).
pub fn brute_force_farthest_exp(basis: &LatticeBasis, budget: u64, f: &Field) -> Result<i64> {
    let (lo, hi) = farthest_digit_range(basis, f)?;
    let (m, grid) = digit_grid(basis.d, lo, hi, budget, f)?;
    let (s, _) = basis.cleared(f);
    let mut nums: Vec<Vec<Poly>> = Vec::new();
    for_each_vector(basis, &hadamard_windows(basis, hi, f)?, budget, f, |_, num| {
        if num_norm(num, s.deg()).exp().is_none_or(|e| e <= hi) {
            nums.push(num.iter().map(|p| p.shift(m)).collect());
        }
    })?;
    let mut far = i64::MIN;
    for y in &grid {
        let sy: Vec<Poly> = y.iter().map(|p| p.mul(&s, f)).collect();
        let dist = nums
            .iter()
            .map(|v| sy.iter().zip(v).map(|(a, b)| a.sub(b, f).deg()).max().unwrap())
            .min()
            .unwrap();
        // dist = deg(x^m s (y − v)); the lattice contains 0 so nums is nonempty
        far = far.max(dist - m as i64 - s.deg());
    }
    Ok(far)
}

/// Plane case: `log_q max_y dist(y, Λ + K w)`, using `dist(z, K w) = |det(z, w)| / ‖w‖`.
pub fn brute_force_farthest_from_line_exp(
    basis: &LatticeBasis,
    w: &[RatFn],
    budget: u64,
    f: &Field,
) -> Result<i64> {
    if basis.d != 2 || w.len() != 2 {
        return Err(Error::Dimension("line oracle is planar".into()));
    }
    let wn = crate::laurent::vec_norm(w).exp().ok_or_else(|| Error::Singular("zero direction".into()))?;
    let det = |z: &[RatFn]| z[0].mul(&w[1], f).sub(&z[1].mul(&w[0], f), f);
    let (lo, hi) = farthest_digit_range(basis, f)?;
    let (m, grid) = digit_grid(2, lo, hi, budget, f)?;
    let (s, _) = basis.cleared(f);
    let mut values: Vec<RatFn> = Vec::new();
    for_each_vector(basis, &hadamard_windows(basis, hi, f)?, budget, f, |_, num| {
        let v: Vec<RatFn> = num.iter().map(|p| RatFn::new(p.clone(), s.clone(), f).unwrap()).collect();
        let dv = det(&v);
        if !values.contains(&dv) {
            values.push(dv);
        }
    })?;
    let xm = Poly::monomial(1, m);
    let mut far = i64::MIN;
    for y in &grid {
        let y: Vec<RatFn> = y.iter().map(|p| RatFn::new(p.clone(), xm.clone(), f).unwrap()).collect();
        let dy = det(&y);
        let best = values.iter().map(|a| dy.sub(a, f).norm()).min().unwrap();
        if let Some(e) = best.exp() {
            far = far.max(e - wn);
        }
    }
    Ok(far)
}
