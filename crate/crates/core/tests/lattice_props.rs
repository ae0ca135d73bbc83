//! Rational functions, Laurent expansions and lattice reduction invariants.

use ffdioph::lattice::oracle::{brute_force_count, brute_force_shortest};
use ffdioph::lattice::{column_reduce_full, det_exp};
use ffdioph::laurent::{vec_norm, Laurent};
use ffdioph::sample::{apply, case_rng, random_basis, random_isometry};
use ffdioph::{Field, Poly, RatFn};
use proptest::prelude::*;

fn ratfn(q: u32) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (prop::collection::vec(0..q as u8, 0..5), prop::collection::vec(0..q as u8, 1..5))
}

fn build(f: &Field, (n, d): (Vec<u8>, Vec<u8>)) -> Option<RatFn> {
    RatFn::new(Poly::from_coeffs(n), Poly::from_coeffs(d), f).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rational_functions_form_a_valued_field(
        (q, parts) in prop::sample::select(vec![2u32, 3, 4, 5])
            .prop_flat_map(|q| (Just(q), prop::collection::vec(ratfn(q), 3))),
    ) {
        let f = Field::of_order(q).unwrap();
        let mut it = parts.into_iter().map(|p| build(&f, p));
        let (Some(a), Some(b), Some(c)) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap()) else {
            return Ok(());
        };
        prop_assert_eq!(a.mul(&b.add(&c, &f), &f), a.mul(&b, &f).add(&a.mul(&c, &f), &f));
        prop_assert_eq!(a.mul(&b, &f).norm(), a.norm().mul(b.norm()));
        // ultrametric inequality, with equality when the norms differ
        let s = a.add(&b, &f).norm();
        prop_assert!(s <= a.norm().max(b.norm()));
        if a.norm() != b.norm() {
            prop_assert_eq!(s, a.norm().max(b.norm()));
        }
        if !b.is_zero() {
            prop_assert_eq!(a.div(&b, &f).unwrap().mul(&b, &f), a.clone());
        }
        // θ = poly part + fractional part with |frac| < 1
        let frac = a.frac_part(&f);
        prop_assert!(frac.norm() < ffdioph::QNorm::pow(0));
        prop_assert_eq!(RatFn::from_poly(a.poly_part(&f)).add(&frac, &f), a.clone());
        // the Laurent expansion reproduces the leading exponent and the norm
        let l = Laurent::from_ratfn(&a, -12, &f);
        if !a.is_zero() {
            prop_assert_eq!(l.norm().unwrap(), a.norm());
        }
    }

    #[test]
    fn reduction_invariants(q in prop::sample::select(vec![2u32, 3]), d in 2usize..=3, seed: u64) {
        let f = Field::of_order(q).unwrap();
        let mut rng = case_rng(seed, 0);
        let basis = random_basis(&mut rng, d, &f);
        let red = column_reduce_full(&basis, &f).unwrap();
        let minima = red.minima_exps();
        // sorted minima whose product is the covolume
        prop_assert!(minima.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(minima.iter().sum::<i64>(), det_exp(&basis, &f).unwrap());
        prop_assert_eq!(red.covolume_exp(), det_exp(&basis, &f).unwrap());
        // the reduced basis spans the input lattice and is orthogonal
        let back = column_reduce_full(&red.basis(&f), &f).unwrap();
        prop_assert!(red.same_lattice(&back));
        for col in &basis.columns {
            prop_assert!(red.contains(col, &f));
        }
        let c: Vec<Poly> = (0..d).map(|i| Poly::from_index(seed.rotate_left(i as u32 * 7) % 50, q)).collect();
        let v = red.combine(&c, &f);
        let termwise = (0..d)
            .filter(|&i| !c[i].is_zero())
            .map(|i| c[i].norm().mul_pow(minima[i]))
            .max()
            .unwrap_or(ffdioph::QNorm::ZERO);
        prop_assert_eq!(vec_norm(&v), termwise);
        // λ_1 agrees with the shortest vector found by search
        if let Ok(shortest) = brute_force_shortest(&basis, 1_000_000, &f) {
            prop_assert_eq!(shortest.exp(), Some(red.lambda1_exp()));
        }
        // ball counts from the minima agree with enumeration
        for r in -1..=1 {
            if let Ok(brute) = brute_force_count(&basis, red.lambda1_exp() + r, 1_000_000, &f) {
                prop_assert_eq!(red.count_points(red.lambda1_exp() + r, q).unwrap(), brute as u128);
            }
        }
    }

    #[test]
    fn isometries_preserve_geometry(q in prop::sample::select(vec![2u32, 3]), d in 2usize..=4, seed: u64) {
        let f = Field::of_order(q).unwrap();
        let mut rng = case_rng(seed, 1);
        let basis = random_basis(&mut rng, d, &f);
        let g = random_isometry(&mut rng, d, &f);
        let a = column_reduce_full(&basis, &f).unwrap();
        let b = column_reduce_full(&apply(&g, &basis, &f), &f).unwrap();
        prop_assert_eq!(a.minima_exps(), b.minima_exps());
        prop_assert_eq!(a.covering_radius_exp(), b.covering_radius_exp());
        prop_assert_eq!(a.covering_radius_exp(), a.lambda_last_exp() - 2);
    }
}
