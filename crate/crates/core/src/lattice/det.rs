//! Exact linear algebra over F_q[x] and F_q(x): fraction-free determinants and solving.

use crate::ffpoly::{Field, Poly};
use crate::laurent::RatFn;

/// Determinant (up to sign) of a square polynomial matrix given by columns (Bareiss).
pub fn det_poly(cols: &[Vec<Poly>], f: &Field) -> Poly {
    let n = cols.len();
    if n == 0 {
        return Poly::one();
    }
    // a[i][j] = row i, column j
    let mut a: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
    let mut prev = Poly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => a.swap(k, i),
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k], f).sub(&a[i][k].mul(&a[k][j], f), f);
                a[i][j] = t.exact_div(&prev, f).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    a[n - 1][n - 1].clone()
}

/// Solves `Σ c_j cols[j] = v` over F_q(x). Returns `None` if `v` is outside the span.
/// Free variables (dependent columns) are set to zero.
pub fn solve(cols: &[Vec<RatFn>], v: &[RatFn], f: &Field) -> Option<Vec<RatFn>> {
    let r = cols.len();
    let d = v.len();
    let mut m: Vec<Vec<RatFn>> = (0..d)
        .map(|i| {
            let mut row: Vec<RatFn> = (0..r).map(|j| cols[j][i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let Some(p) = (row..d).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].inv(f).unwrap();
        for j in col..=r {
            m[row][j] = m[row][j].mul(&inv, f);
        }
        for i in 0..d {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in col..=r {
                    let t = m[row][j].mul(&factor, f);
                    m[i][j] = m[i][j].sub(&t, f);
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == d {
            break;
        }
    }
    if (row..d).any(|i| !m[i][r].is_zero()) {
        return None;
    }
    let mut sol = vec![RatFn::zero(); r];
    for (i, &c) in pivot_cols.iter().enumerate() {
        sol[c] = m[i][r].clone();
    }
    Some(sol)
}

/// Rank over F_q(x) of a list of vectors.
pub fn rank(vectors: &[Vec<RatFn>], f: &Field) -> usize {
    let Some(d) = vectors.first().map(Vec::len) else { return 0 };
    let mut m: Vec<Vec<RatFn>> = vectors.to_vec();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].inv(f).unwrap();
        for i in rank + 1..m.len() {
            if !m[i][col].is_zero() {
                let factor = m[i][col].mul(&inv, f);
                for j in col..d {
                    let t = m[rank][j].mul(&factor, f);
                    m[i][j] = m[i][j].sub(&t, f);
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_triangular() {
        let f = Field::of_order(3).unwrap();
        let x = Poly::x();
        let cols = vec![
            vec![x.clone(), Poly::zero(), Poly::zero()],
            vec![Poly::one(), x.mul(&x, &f), Poly::zero()],
            vec![Poly::constant(2), x.clone(), Poly::from_coeffs([1, 1])],
        ];
        assert_eq!(det_poly(&cols, &f).deg(), 4);
    }

    #[test]
    fn solve_roundtrip() {
        let f = Field::of_order(2).unwrap();
        let x = RatFn::from_poly(Poly::x());
        let cols = vec![vec![RatFn::one(), x.clone()], vec![RatFn::zero(), RatFn::one()]];
        let v = vec![x.clone(), RatFn::one()];
        let c = solve(&cols, &v, &f).unwrap();
        assert_eq!(c[0], x);
        assert_eq!(rank(&cols, &f), 2);
    }
}
