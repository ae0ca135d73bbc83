//! Reproducible random lattices and isometries for the randomized verification suites.
//!
//! Every case draws from its own ChaCha stream `(seed, case index)`, so results do not
//! depend on the order in which workers pick up cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ffpoly::{Field, Poly};
use crate::lattice::det::det_poly;
use crate::lattice::LatticeBasis;
use crate::laurent::RatFn;

/// The generator for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_elem<R: Rng>(rng: &mut R, f: &Field) -> u8 {
    rng.gen_range(0..f.q()) as u8
}

/// `Σ_{j=lo}^{hi} c_j x^j` with uniform digits.
fn random_laurent_poly<R: Rng>(rng: &mut R, lo: i64, hi: i64, f: &Field) -> RatFn {
    let shift = (-lo).max(0) as usize;
    let coeffs: Vec<u8> = (lo..=hi).map(|_| random_elem(rng, f)).collect();
    let num = Poly::from_coeffs(coeffs).shift((lo + shift as i64) as usize);
    RatFn::new(num, Poly::monomial(1, shift), f).unwrap()
}

/// A random full-rank basis: entries in `F_q + F_q x⁻¹`, column `j` scaled by
/// `x^{e_j}` with `e_j ∈ {−1, 0, 1}`. Singular draws are rejected.
pub fn random_basis<R: Rng>(rng: &mut R, d: usize, f: &Field) -> LatticeBasis {
    loop {
        let columns: Vec<Vec<RatFn>> = (0..d)
            .map(|_| {
                let e = rng.gen_range(-1i64..=1);
                (0..d).map(|_| random_laurent_poly(rng, e - 1, e, f)).collect()
            })
            .collect();
        let basis = LatticeBasis::new(columns).expect("square basis");
        let (_, cols) = basis.cleared(f);
        if !det_poly(&cols, f).is_zero() {
            return basis;
        }
    }
}

/// A random element of `GL_d(O)`: a permutation matrix times a unipotent upper
/// triangular matrix with entries in `F_q + F_q x⁻¹ + F_q x⁻²`. Returned as rows.
pub fn random_isometry<R: Rng>(rng: &mut R, d: usize, f: &Field) -> Vec<Vec<RatFn>> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let unip: Vec<Vec<RatFn>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match j.cmp(&i) {
                    std::cmp::Ordering::Less => RatFn::zero(),
                    std::cmp::Ordering::Equal => RatFn::one(),
                    std::cmp::Ordering::Greater => random_laurent_poly(rng, -2, 0, f),
                })
                .collect()
        })
        .collect();
    // row i of P·U is row perm[i] of U
    perm.iter().map(|&p| unip[p].clone()).collect()
}

/// `g · B` for a matrix `g` given by rows.
pub fn apply(g: &[Vec<RatFn>], basis: &LatticeBasis, f: &Field) -> LatticeBasis {
    let columns = basis
        .columns
        .iter()
        .map(|c| {
            g.iter()
                .map(|row| row.iter().zip(c).fold(RatFn::zero(), |acc, (a, b)| acc.add(&a.mul(b, f), f)))
                .collect()
        })
        .collect();
    LatticeBasis { d: basis.d, columns }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{column_reduce_full, det_exp};

    #[test]
    fn reproducible_and_full_rank() {
        let f = Field::of_order(3).unwrap();
        let a = random_basis(&mut case_rng(7, 3), 3, &f);
        let b = random_basis(&mut case_rng(7, 3), 3, &f);
        assert_eq!(a, b);
        assert_ne!(a, random_basis(&mut case_rng(7, 4), 3, &f));
        assert!(det_exp(&a, &f).is_ok());
    }

    #[test]
    fn isometries_preserve_minima() {
        let f = Field::of_order(2).unwrap();
        let mut rng = case_rng(1, 0);
        for _ in 0..10 {
            let b = random_basis(&mut rng, 3, &f);
            let g = random_isometry(&mut rng, 3, &f);
            let r1 = column_reduce_full(&b, &f).unwrap();
            let r2 = column_reduce_full(&apply(&g, &b, &f), &f).unwrap();
            assert_eq!(r1.minima_exps(), r2.minima_exps());
        }
    }
}
