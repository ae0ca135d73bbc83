//! Lattices in F_q((x⁻¹))^d generated by vectors with entries in F_q(x).
//!
//! A lattice is reduced by clearing denominators with their lcm `s` and bringing the
//! polynomial matrix to Popov form. The resulting basis `ξ_1, …, ξ_r` is orthogonal
//! (`‖Σ c_i ξ_i‖ = max |c_i| ‖ξ_i‖`), realises the successive minima
//! `λ_i = q^{cdeg_i - deg s}`, and is canonical for the lattice.

pub mod det;
pub mod oracle;
pub mod reduce;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::laurent::{vec_norm, RatFn};
use crate::qexp::QNorm;
use reduce::{col_deg, leading_pos, PolyCols};

/// A finite generating set (usually a basis) of a lattice, as columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub d: usize,
    pub columns: Vec<Vec<RatFn>>,
}

impl LatticeBasis {
    pub fn new(columns: Vec<Vec<RatFn>>) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        if d == 0 || columns.iter().any(|c| c.len() != d) {
            return Err(Error::Dimension("columns must be nonempty and of equal length".into()));
        }
        Ok(LatticeBasis { d, columns })
    }

    pub fn identity(d: usize) -> Self {
        let columns = (0..d)
            .map(|j| (0..d).map(|i| if i == j { RatFn::one() } else { RatFn::zero() }).collect())
            .collect();
        LatticeBasis { d, columns }
    }

    /// Re-normalises entries read from JSON.
    pub fn normalized(&self, f: &Field) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| c.iter().map(|r| r.normalized(f)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        LatticeBasis::new(columns)
    }

    /// Common denominator `s` (monic lcm) and the polynomial matrix `s · B`.
    pub fn cleared(&self, f: &Field) -> (Poly, PolyCols) {
        let s = self.columns.iter().flatten().fold(Poly::one(), |acc, r| acc.lcm(r.den(), f));
        let cols = self
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|r| r.num().mul(&s.exact_div(r.den(), f).unwrap(), f))
                    .collect()
            })
            .collect();
        (s, cols)
    }

    pub fn column_norms(&self) -> Vec<QNorm> {
        self.columns.iter().map(|c| vec_norm(c)).collect()
    }
}

/// A reduced (Popov) basis of a lattice of rank `r` in `K̃^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedLattice {
    pub d: usize,
    /// Common denominator `s`.
    pub denom: Poly,
    /// Popov columns of `s · ξ`, sorted by (degree, pivot row).
    pub cols: PolyCols,
    pub col_degs: Vec<i64>,
    pub pivots: Vec<usize>,
}

impl ReducedLattice {
    /// Reduces the lattice generated by the columns of `s⁻¹ · cols` (any rank).
    pub fn from_poly_generators(denom: Poly, mut cols: PolyCols, f: &Field) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != d) {
            return Err(Error::Dimension("ragged generator matrix".into()));
        }
        reduce::weak_popov(&mut cols, f);
        reduce::popov(&mut cols, f);
        let col_degs = cols.iter().map(|c| col_deg(c)).collect();
        let pivots = cols.iter().map(|c| leading_pos(c).unwrap()).collect();
        let c = f.inv(denom.lc());
        Ok(ReducedLattice { d, denom: denom.scale(c, f), cols, col_degs, pivots })
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// `log_q λ_i` for `i = 1..rank`, nondecreasing.
    pub fn minima_exps(&self) -> Vec<i64> {
        let s = self.denom.deg();
        self.col_degs.iter().map(|c| c - s).collect()
    }

    pub fn minimum_exp(&self, i: usize) -> i64 {
        self.col_degs[i] - self.denom.deg()
    }

    pub fn lambda1_exp(&self) -> i64 {
        self.minimum_exp(0)
    }

    pub fn lambda_last_exp(&self) -> i64 {
        self.minimum_exp(self.rank() - 1)
    }

    /// `log_q` of the covolume (`Π λ_i`).
    pub fn covolume_exp(&self) -> i64 {
        self.minima_exps().iter().sum()
    }

    pub fn xi(&self, i: usize, f: &Field) -> Vec<RatFn> {
        self.cols[i]
            .iter()
            .map(|p| RatFn::new(p.clone(), self.denom.clone(), f).unwrap())
            .collect()
    }

    pub fn basis(&self, f: &Field) -> LatticeBasis {
        LatticeBasis { d: self.d, columns: (0..self.rank()).map(|i| self.xi(i, f)).collect() }
    }

    /// `Σ c_i ξ_i` for polynomial coefficients.
    pub fn combine(&self, c: &[Poly], f: &Field) -> Vec<RatFn> {
        let mut num = vec![Poly::zero(); self.d];
        for (ci, col) in c.iter().zip(&self.cols) {
            if ci.is_zero() {
                continue;
            }
            for (acc, p) in num.iter_mut().zip(col) {
                *acc = acc.add(&ci.mul(p, f), f);
            }
        }
        num.into_iter().map(|p| RatFn::new(p, self.denom.clone(), f).unwrap()).collect()
    }

    /// Coordinates of `v` in the reduced basis, if `v` lies in its K-span.
    pub fn coords(&self, v: &[RatFn], f: &Field) -> Option<Vec<RatFn>> {
        let cols: Vec<Vec<RatFn>> = (0..self.rank()).map(|i| self.xi(i, f)).collect();
        det::solve(&cols, v, f)
    }

    /// Membership test: the coordinates exist and are polynomials.
    pub fn contains(&self, v: &[RatFn], f: &Field) -> bool {
        self.coords(v, f).is_some_and(|c| c.iter().all(RatFn::is_poly))
    }

    /// Coefficient windows for the points of norm `<= q^r`: `deg c_i <= r - log λ_i`.
    pub fn ball_windows(&self, r: i64) -> Vec<i64> {
        self.minima_exps().iter().map(|l| r - l).collect()
    }

    /// `#(Λ ∩ B(0, q^r)) = Π ⌈q · q^r / λ_i⌉` with `⌈q^e⌉ = max(q^e, 1)`.
    pub fn count_points_exp(&self, r: i64) -> i64 {
        self.minima_exps().iter().map(|l| (r - l + 1).max(0)).sum()
    }

    pub fn count_points(&self, r: i64, q: u32) -> Result<u128> {
        let e = self.count_points_exp(r);
        (q as u128)
            .checked_pow(e as u32)
            .ok_or_else(|| Error::TooLarge(format!("q^{e} points")))
    }

    /// Iterates the coefficient vectors of the points of norm `<= q^r`.
    pub fn points_in_ball(&self, r: i64, q: u32) -> impl Iterator<Item = Vec<Poly>> {
        let windows = self.ball_windows(r);
        let sizes: Vec<u64> = windows
            .iter()
            .map(|&w| if w < 0 { 1 } else { (q as u64).pow(w as u32 + 1) })
            .collect();
        let total: u64 = sizes.iter().product();
        (0..total).map(move |mut idx| {
            sizes
                .iter()
                .map(|&s| {
                    let c = Poly::from_index(idx % s, q);
                    idx /= s;
                    c
                })
                .collect()
        })
    }

    /// Covering radius `e(Λ) = λ_d / q²` (radii in `q^Z`), full-rank lattices only.
    pub fn covering_radius_exp(&self) -> i64 {
        self.lambda_last_exp() - 2
    }

    /// Covering radius of `Λ + H'` with `H' = span(ξ_1, …, ξ_{d-1})`, computed in the
    /// one-dimensional quotient `K̃^d / H'`, where the image of `Λ` is generated by the
    /// image of `ξ_d`, of norm `λ_d` (orthogonality of the reduced basis).
    pub fn covering_radius_plus_hyperplane_exp(&self) -> i64 {
        one_dim_covering_exp(self.lambda_last_exp())
    }

    /// Equality of lattices (Popov forms are canonical).
    pub fn same_lattice(&self, o: &ReducedLattice) -> bool {
        self.denom == o.denom && self.cols == o.cols
    }
}

/// Covering radius of the one-dimensional lattice `x^ℓ R ⊂ K̃`: the farthest points from it
/// are at distance `q^{ℓ-1}` (e.g. `x^{ℓ-1}`), so the largest empty ball has radius `q^{ℓ-2}`.
pub fn one_dim_covering_exp(lambda_exp: i64) -> i64 {
    (lambda_exp - 1) - 1
}

/// Reduces a lattice given by a basis or generating set.
pub fn column_reduce(basis: &LatticeBasis, f: &Field) -> Result<ReducedLattice> {
    let (s, cols) = basis.cleared(f);
    ReducedLattice::from_poly_generators(s, cols, f)
}

/// Reduction of a full-rank lattice; errors on singular input.
pub fn column_reduce_full(basis: &LatticeBasis, f: &Field) -> Result<ReducedLattice> {
    let red = column_reduce(basis, f)?;
    if red.rank() != basis.d {
        return Err(Error::Singular(format!("rank {} < {}", red.rank(), basis.d)));
    }
    Ok(red)
}

/// `log_q |det B|` by fraction-free elimination, independent of the reduction.
pub fn det_exp(basis: &LatticeBasis, f: &Field) -> Result<i64> {
    if basis.columns.len() != basis.d {
        return Err(Error::Dimension("determinant needs a square basis".into()));
    }
    let (s, cols) = basis.cleared(f);
    let dp = det::det_poly(&cols, f);
    if dp.is_zero() {
        return Err(Error::Singular("zero determinant".into()));
    }
    Ok(dp.deg() - basis.d as i64 * s.deg())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[u8]) -> Poly {
        Poly::from_coeffs(c.iter().copied())
    }

    #[test]
    fn documented_minima() {
        let f = Field::of_order(2).unwrap();
        // diag(x, x^2) -> (q, q^2)
        let b = LatticeBasis::new(vec![
            vec![RatFn::from_poly(p(&[0, 1])), RatFn::zero()],
            vec![RatFn::zero(), RatFn::from_poly(p(&[0, 0, 1]))],
        ])
        .unwrap();
        let r = column_reduce_full(&b, &f).unwrap();
        assert_eq!(r.minima_exps(), vec![1, 2]);
        assert_eq!(det_exp(&b, &f).unwrap(), 3);
        // columns (1, x), (0, 1) -> (1, 1)
        let b = LatticeBasis::new(vec![
            vec![RatFn::one(), RatFn::from_poly(p(&[0, 1]))],
            vec![RatFn::zero(), RatFn::one()],
        ])
        .unwrap();
        let r = column_reduce_full(&b, &f).unwrap();
        assert_eq!(r.minima_exps(), vec![0, 0]);
        // singular input
        let b = LatticeBasis::new(vec![vec![RatFn::one(), RatFn::one()], vec![RatFn::one(), RatFn::one()]]).unwrap();
        assert!(matches!(column_reduce_full(&b, &f), Err(Error::Singular(_))));
    }

    #[test]
    fn point_count_documented() {
        let f = Field::of_order(2).unwrap();
        let r = column_reduce_full(&LatticeBasis::identity(2), &f).unwrap();
        assert_eq!(r.count_points(1, 2).unwrap(), 16);
        assert_eq!(r.covering_radius_exp(), -2);
    }
}
