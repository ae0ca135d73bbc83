//! Bound formulas, exact exponent comparisons and the fractal structures.

use ffdioph::bounds::{base_dim, bound_report, lower_bound, regions, upper_bound, upper_nontrivial};
use ffdioph::diophantine::ApproxPair;
use ffdioph::fractal_lower::{check_child, count_xn, enumerate_children, verify_nesting, LowerNode};
use ffdioph::fractal_upper::round_up_dyadic;
use ffdioph::qexp::{cmp_qpow, floor_log, qpow_rat, rat, to_f64, QExp};
use ffdioph::{Field, Poly};
use num_rational::BigRational;
use proptest::prelude::*;

fn eps_strategy() -> impl Strategy<Value = BigRational> {
    (1i64..40, 2i64..4000).prop_filter_map("ε < 1", |(n, d)| (n < d).then(|| rat(n, d)))
}

proptest! {
    #[test]
    fn bound_ordering(q in prop::sample::select(vec![2u32, 3, 4, 5]), d in 2usize..=4, eps in eps_strategy()) {
        let report = bound_report(q, d, &eps).unwrap();
        let base = to_f64(&base_dim(d).unwrap());
        prop_assert!(report.upper >= base);
        if let Some(l) = report.lower {
            prop_assert!(base <= l && l <= report.upper);
        }
        // the exact predicate agrees with the value away from the edge
        let dd = d as f64;
        if (report.upper - dd).abs() > 1e-9 {
            prop_assert_eq!(report.upper <= dd, upper_nontrivial(q, d, &eps));
        }
        // the upper bound increases with ε
        let smaller = &eps / rat(2, 1);
        prop_assert!(upper_bound(q, d, &smaller).unwrap() <= report.upper);
        // below the monotone edge the lower bound increases with ε
        if regions(q, d).unwrap().lower_monotone_edge.at_least(&eps) {
            if let (Ok(a), Ok(b)) = (lower_bound(q, d, &smaller), lower_bound(q, d, &eps)) {
                prop_assert!(a <= b);
            }
        }
    }

    #[test]
    fn exponent_comparisons(q in prop::sample::select(vec![2u32, 3, 5]), n in -40i64..40, den in 1i64..6, r in eps_strategy()) {
        let e = QExp::new(n, den);
        let exact = cmp_qpow(q, e, &r);
        let approx = (q as f64).powf(n as f64 / den as f64).partial_cmp(&to_f64(&r)).unwrap();
        let gap = ((q as f64).powf(n as f64 / den as f64) / to_f64(&r)).ln().abs();
        if gap > 1e-9 {
            prop_assert_eq!(exact, approx);
        }
        let k = floor_log(q, &r);
        prop_assert!(qpow_rat(q, k) <= r && r < qpow_rat(q, k + 1));
    }

    #[test]
    fn dyadic_rounding_is_upward(x in 0.0f64..10.0, bits in 1u32..20) {
        let r = round_up_dyadic(x, bits);
        prop_assert!(to_f64(&r) >= x);
        prop_assert!(to_f64(&r) - x <= 1.0 / (1u64 << bits) as f64 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lower_children_are_valid_and_nested(pick in 0usize..64) {
        let f = Field::of_order(2).unwrap();
        let eps = rat(1, 4);
        let root = LowerNode::root(2, &f);
        let children = enumerate_children(&root, &eps, 1, &f).unwrap();
        prop_assume!(!children.is_empty());
        let c = &children[pick % children.len()];
        prop_assert!(check_child(&root, &c.v, &eps, &f).unwrap().all());
        let node = LowerNode::new(&c.v, &f);
        prop_assert!(verify_nesting(&root, &node, &f).holds());
        prop_assert!(node.in_lambda_window(&eps, 2));
    }
}

/// `#X_n` by direct search: `m` with `‖m‖ < |n|`, `gcd(m, n) = 1`, and no nonzero
/// `c·m (mod n)` of norm at most `η`, for the root in dimension 3 where `η² = ε²|n|`.
fn xn_oracle_root_d3(n: &Poly, eps: &BigRational, f: &Field) -> u128 {
    let q = f.q();
    let deg = n.deg();
    // |v| <= η  ⇔  q^{2·deg v} <= ε²|n|
    let small = |p: &Poly| p.is_zero() || qpow_rat(q, 2 * p.deg()) <= eps * eps * qpow_rat(q, deg);
    let residues: Vec<Poly> = Poly::up_to_degree(deg - 1, q).collect();
    let mut count = 0;
    for m1 in &residues {
        for m2 in &residues {
            if !ffdioph::ffpoly::gcd_all([m1, m2, n], f).is_one() {
                continue;
            }
            let short = residues.iter().filter(|c| !c.is_zero()).any(|c| {
                let v1 = c.mul(m1, f).rem(n, f).unwrap();
                let v2 = c.mul(m2, f).rem(n, f).unwrap();
                !(v1.is_zero() && v2.is_zero()) && small(&v1) && small(&v2)
            });
            if !short {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn xn_counts_match_direct_search() {
    let f = Field::of_order(3).unwrap();
    let root = LowerNode::root(3, &f);
    let eps = rat(1, 4);
    for n in Poly::monic_of_degree(2, 3).chain(Poly::monic_of_degree(3, 3).step_by(5)) {
        assert_eq!(count_xn(&root, &n, &eps, &f).unwrap().count, xn_oracle_root_d3(&n, &eps, &f), "n = {n:?}");
    }
}

/// The per-`n` lower bound fails for irreducible cubics over F_3 at d = 3, ε = 1/4:
/// 624 admissible `m` against the bound 26·(27 − 28/16) = 1313/2.
#[test]
fn xn_bound_counterexample_is_reproduced() {
    let f = Field::of_order(3).unwrap();
    let root = LowerNode::root(3, &f);
    let n = Poly::from_coeffs([1, 2, 0, 1]);
    let c = count_xn(&root, &n, &rat(1, 4), &f).unwrap();
    assert_eq!(c.count, 624);
    assert_eq!(xn_oracle_root_d3(&n, &rat(1, 4), &f), 624);
    assert_eq!(c.bound, rat(1313, 2));
    assert!(!c.holds);
}

#[test]
fn root_pair_is_primitive() {
    let f = Field::of_order(2).unwrap();
    assert!(ApproxPair::root(3).is_primitive(&f));
}
