//! Farey lattices, projections, fibers and best approximations on random pairs.

use ffdioph::diophantine::{
    approx_quality_exact, best_approx_sequence, best_approx_sequence_exact, farey_lattice, fiber, fiber_count,
    fiber_exhaustive, pi_u, r_of_u_bruteforce, ApproxPair,
};
use ffdioph::diophantine::best::theta_from_ratfns;
use ffdioph::{Field, Poly, RatFn};
use proptest::prelude::*;

/// `(q, d, a-indices, b-index)` with `b` nonzero of degree at most 3.
fn raw_pair() -> impl Strategy<Value = (u32, usize, Vec<u64>, u64)> {
    (prop::sample::select(vec![2u32, 3]), 1usize..=2).prop_flat_map(|(q, d)| {
        let top = (q as u64).pow(4);
        (Just(q), Just(d), prop::collection::vec(0..top, d), 1..top)
    })
}

fn pair(q: u32, a: &[u64], b: u64, f: &Field) -> Option<ApproxPair> {
    let b = Poly::from_index(b, q);
    let a = a.iter().map(|&i| Poly::from_index(i, q).rem(&b, f).unwrap()).collect();
    ApproxPair::new(a, b, f).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn farey_lattice_identities((q, _d, a, b) in raw_pair()) {
        let f = Field::of_order(q).unwrap();
        let Some(u) = pair(q, &a, b, &f) else { return Ok(()) };
        let lat = farey_lattice(&u, &f);
        prop_assert_eq!(lat.lattice.covolume_exp(), -u.deg());
        prop_assert_eq!(Some(lat.r_exp()), r_of_u_bruteforce(&u, &f).exp());
        // scaling by a unit gives the same lattice
        let other = farey_lattice(&u.scale(f.units().last().unwrap(), &f), &f);
        prop_assert!(lat.lattice.same_lattice(&other.lattice));
        prop_assert_eq!(u.canonical(&f).canonical(&f), u.canonical(&f));
    }

    #[test]
    fn projections_land_in_the_lattice((q, d, a, b) in raw_pair(), (a2, b2) in (prop::collection::vec(0u64..81, 2), 1u64..81)) {
        let f = Field::of_order(q).unwrap();
        let Some(u) = pair(q, &a, b, &f) else { return Ok(()) };
        let lat = farey_lattice(&u, &f);
        let b2 = Poly::from_index(b2 % (q as u64).pow(4), q);
        prop_assume!(!b2.is_zero());
        let a2: Vec<Poly> = a2[..d].iter().map(|&i| Poly::from_index(i % (q as u64).pow(4), q)).collect();
        let v = ApproxPair { a: a2, b: b2 };
        let alpha = pi_u(&u, &v, &f);
        prop_assert!(lat.lattice.contains(&alpha, &f));
    }

    #[test]
    fn fibers_of_primitive_vectors((q, d, a, b) in raw_pair(), k in 0u32..=2) {
        let f = Field::of_order(q).unwrap();
        let Some(u) = pair(q, &a, b, &f) else { return Ok(()) };
        let lat = farey_lattice(&u, &f);
        // each reduced basis vector is primitive in Λ_u
        for i in 0..d {
            let alpha = lat.xi(i, &f);
            let n = fiber_count(&u, &alpha, k, &f).unwrap();
            prop_assert_eq!(n as u64, (q as u64 - 1) * (q as u64).pow(k));
            let vs = fiber(&u, &alpha, k, false, &f).unwrap();
            for v in &vs {
                prop_assert_eq!(pi_u(&u, v, &f), alpha.clone());
                prop_assert_eq!(v.deg(), u.deg() + k as i64);
            }
            if u.deg() + k as i64 <= 3 && d == 1 || u.deg() + k as i64 <= 2 {
                let key = |v: &ApproxPair| (v.b.index(q), v.a.iter().map(|p| p.index(q)).collect::<Vec<_>>());
                let mut a: Vec<_> = vs.iter().map(key).collect();
                let mut b: Vec<_> = fiber_exhaustive(&u, &alpha, k, &f).iter().map(key).collect();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn best_approximations_improve((q, _d, a, b) in raw_pair()) {
        let f = Field::of_order(q).unwrap();
        let Some(u) = pair(q, &a, b, &f) else { return Ok(()) };
        let theta: Vec<RatFn> = u.a.iter().map(|ai| RatFn::new(ai.clone(), u.b.clone(), &f).unwrap()).collect();
        let bound = 4;
        let exact = best_approx_sequence_exact(&theta, bound, &f).unwrap();
        let scanned = best_approx_sequence(&theta_from_ratfns(&theta, bound, &f), bound, &f).unwrap();
        prop_assert_eq!(exact.pairs().collect::<Vec<_>>(), scanned.pairs().collect::<Vec<_>>());
        let pairs: Vec<&ApproxPair> = exact.pairs().collect();
        for w in pairs.windows(2) {
            prop_assert!(w[0].deg() < w[1].deg());
            prop_assert!(approx_quality_exact(&theta, w[1], &f) < approx_quality_exact(&theta, w[0], &f));
        }
        // the sequence ends at the denominator of θ
        prop_assert!(exact.rational_terminated);
        prop_assert_eq!(pairs.last().unwrap().deg(), u.deg());
    }
}
