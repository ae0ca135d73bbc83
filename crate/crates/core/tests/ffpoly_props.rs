//! Ring, division and arithmetic-function properties of `F_q[x]`.

use ffdioph::ffpoly::arith::{divisor_sum_d1, divisor_sum_d1_direct, euler_phi, euler_phi_direct};
use ffdioph::ffpoly::factor::{factor, factor_trial, is_irreducible};
use ffdioph::{Field, Poly};
use proptest::prelude::*;

const ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

fn poly(q: u32, max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(0..q as u8, 0..=max_len).prop_map(Poly::from_coeffs)
}

fn field_and_polys(n: usize, max_len: usize) -> impl Strategy<Value = (Field, Vec<Poly>)> {
    prop::sample::select(&ORDERS[..]).prop_flat_map(move |q| {
        (Just(Field::of_order(q).unwrap()), prop::collection::vec(poly(q, max_len), n))
    })
}

proptest! {
    #[test]
    fn ring_axioms((f, p) in field_and_polys(3, 7)) {
        let (a, b, c) = (&p[0], &p[1], &p[2]);
        prop_assert_eq!(a.add(b, &f), b.add(a, &f));
        prop_assert_eq!(a.mul(b, &f), b.mul(a, &f));
        prop_assert_eq!(a.mul(&b.mul(c, &f), &f), a.mul(b, &f).mul(c, &f));
        prop_assert_eq!(a.mul(&b.add(c, &f), &f), a.mul(b, &f).add(&a.mul(c, &f), &f));
        prop_assert!(a.sub(a, &f).is_zero());
        prop_assert_eq!(a.add(&a.neg(&f), &f), Poly::zero());
        if !a.is_zero() && !b.is_zero() {
            prop_assert_eq!(a.mul(b, &f).deg(), a.deg() + b.deg());
            prop_assert_eq!(a.mul(b, &f).norm(), a.norm().mul(b.norm()));
        }
    }

    #[test]
    fn euclidean_division((f, p) in field_and_polys(2, 8)) {
        let (a, b) = (&p[0], &p[1]);
        if b.is_zero() {
            prop_assert!(a.div_rem(b, &f).is_err());
        } else {
            let (quo, rem) = a.div_rem(b, &f).unwrap();
            prop_assert_eq!(quo.mul(b, &f).add(&rem, &f), a.clone());
            prop_assert!(rem.deg() < b.deg());
        }
    }

    #[test]
    fn gcd_and_bezout((f, p) in field_and_polys(3, 6)) {
        let c = &p[2];
        let a = p[0].mul(c, &f);
        let b = p[1].mul(c, &f);
        let (g, s, t) = a.xgcd(&b, &f);
        prop_assert_eq!(s.mul(&a, &f).add(&t.mul(&b, &f), &f), g.clone());
        prop_assert_eq!(g.clone(), a.gcd(&b, &f));
        if !g.is_zero() {
            prop_assert!(g.is_monic());
            prop_assert!(g.divides(&a, &f) && g.divides(&b, &f));
            if !c.is_zero() {
                prop_assert!(c.divides(&g, &f));
            }
        }
    }

    #[test]
    fn factorization_reconstructs((f, p) in field_and_polys(1, 9)) {
        let g = &p[0];
        prop_assume!(!g.is_zero());
        let fact = factor(g, &f).unwrap();
        let mut prod = Poly::constant(g.lc());
        for (h, e) in &fact {
            prop_assert!(h.is_monic() && is_irreducible(h, &f));
            prod = prod.mul(&h.pow(*e, &f), &f);
        }
        prop_assert_eq!(&prod, g);
        prop_assert_eq!(fact, factor_trial(g, &f).unwrap());
    }

    #[test]
    fn arithmetic_functions_match_definitions((f, p) in field_and_polys(2, 5)) {
        let (a, b) = (&p[0], &p[1]);
        prop_assume!(a.deg() >= 1 && b.deg() >= 1);
        prop_assert!(euler_phi(&Poly::one(), &f).is_err());
        prop_assert_eq!(euler_phi(a, &f).unwrap(), euler_phi_direct(a, &f));
        prop_assert_eq!(divisor_sum_d1(a, &f).unwrap(), divisor_sum_d1_direct(a, &f));
        // φ is multiplicative and φ(g) D_1(g) <= |g|²
        if a.gcd(b, &f).is_one() {
            prop_assert_eq!(euler_phi(&a.mul(b, &f), &f).unwrap(), euler_phi(a, &f).unwrap() * euler_phi(b, &f).unwrap());
        }
        let size = (f.q() as u128).pow(a.deg() as u32);
        prop_assert!(euler_phi(a, &f).unwrap() * divisor_sum_d1(a, &f).unwrap() <= size * size);
    }

    #[test]
    fn index_round_trip(q in prop::sample::select(&ORDERS[..]), idx in 0u64..100_000) {
        prop_assert_eq!(Poly::from_index(idx, q).index(q), idx);
    }
}
