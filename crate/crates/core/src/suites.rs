//! Verification suites: each suite expands a configuration into independent cases,
//! and every case recomputes an identity or inequality exactly and compares it with an
//! independent route (closed form, brute force, or definition-level search).
//!
//! Cases carry their own seeded generator, so a report depends only on the
//! configuration, never on scheduling; [`run_case`] results are merged by index.

use std::time::Instant;

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds;
use crate::diophantine::{
    approx_quality_exact, best_approx_sequence, best_approx_sequence_exact, farey_lattice, fiber, fiber_exhaustive,
    r_of_u_bruteforce, ApproxPair,
};
use crate::diophantine::best::theta_from_ratfns;
use crate::error::{Error, Result};
use crate::ffpoly::arith::{divisor_sum_d1_direct, divisor_sum_d1_from, euler_phi_direct, euler_phi_from, phi_d1_degree_bound};
use crate::ffpoly::factor::factor;
use crate::ffpoly::{gcd_all, phi_degree_sum_closed, Field, Poly};
use crate::fractal_lower::{
    build_di_certificate, check_child, enumerate_children, f_n_sum_check, replay_certificate,
    shell_alpha_count, t_window, verify_nesting, verify_separation, xn_degree_sum, Chooser, LowerNode,
};
use crate::fractal_upper::{child_sum_d, child_sum_e, contraction_check, enumerate_d, round_up_dyadic, UpperNode};
use crate::lattice::oracle::{
    brute_force_count, brute_force_farthest_exp, brute_force_farthest_from_line_exp, brute_force_shortest,
    hadamard_windows, DEFAULT_BUDGET,
};
use crate::lattice::{column_reduce_full, det_exp, LatticeBasis, ReducedLattice};
use crate::laurent::{vec_norm, RatFn};
use crate::qexp::{floor_log, fmt_rational, parse_rational, qpow_rat, rat, QExp, QNorm};
use crate::sample::{apply, case_rng, random_basis, random_isometry};

pub const SUITES: &[&str] = &[
    "phi-sum",
    "d1",
    "minkowski",
    "counting",
    "covering",
    "farey",
    "best-approx",
    "fiber",
    "upper",
    "lower",
    "counting-bounds",
    "certificate",
    "bounds",
];

/// Parameters shared by the suites; `None` selects the suite's default range.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteConfig {
    pub q: Option<u32>,
    pub d: Option<usize>,
    pub lmax: Option<u32>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub eps: Option<String>,
    pub n_max: Option<u32>,
    pub cutoff: Option<i64>,
    pub degree: Option<i64>,
    pub steps: Option<usize>,
}

impl SuiteConfig {
    fn qs(&self, default: &[u32]) -> Vec<u32> {
        self.q.map_or_else(|| default.to_vec(), |q| vec![q])
    }
    fn ds(&self, default: &[usize]) -> Vec<usize> {
        self.d.map_or_else(|| default.to_vec(), |d| vec![d])
    }
    fn eps_list(&self, default: &[BigRational]) -> Result<Vec<BigRational>> {
        match &self.eps {
            Some(s) => Ok(vec![parse_rational(s)?]),
            None => Ok(default.to_vec()),
        }
    }
}

pub struct Outcome {
    pub pass: bool,
    pub detail: Value,
}

fn outcome(pass: bool, detail: Value) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

type CaseFn = Box<dyn Fn() -> Result<Outcome> + Send + Sync>;

pub struct Case {
    pub name: String,
    run: CaseFn,
}

fn case<F: Fn() -> Result<Outcome> + Send + Sync + 'static>(name: String, run: F) -> Case {
    Case { name, run: Box::new(run) }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
    pub results: Vec<CaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

/// Runs one case; an error counts as a failure and is reported.
pub fn run_case(index: usize, c: &Case, timings: bool) -> CaseReport {
    let start = Instant::now();
    let (pass, detail, error) = match (c.run)() {
        Ok(o) => (o.pass, o.detail, None),
        Err(e) => (false, Value::Null, Some(e.to_string())),
    };
    CaseReport {
        index,
        name: c.name.clone(),
        pass,
        detail,
        error,
        millis: timings.then(|| start.elapsed().as_millis()),
    }
}

pub fn assemble(suite: &str, config: &SuiteConfig, mut results: Vec<CaseReport>, millis: Option<u128>) -> SuiteReport {
    results.sort_by_key(|r| r.index);
    let passed = results.iter().filter(|r| r.pass).count();
    SuiteReport {
        suite: suite.to_string(),
        config: config.clone(),
        cases: results.len(),
        passed,
        failed: results.len() - passed,
        pass: passed == results.len(),
        results,
        millis,
    }
}

/// Runs a suite sequentially.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteReport> {
    let cases = build_suite(name, config)?;
    let results = cases.iter().enumerate().map(|(i, c)| run_case(i, c, false)).collect();
    Ok(assemble(name, config, results, None))
}

/// Expands a suite into its cases.
pub fn build_suite(name: &str, cfg: &SuiteConfig) -> Result<Vec<Case>> {
    match name {
        "phi-sum" => phi_sum(cfg),
        "d1" => d1(cfg),
        "minkowski" => minkowski(cfg),
        "counting" => counting(cfg),
        "covering" => covering(cfg),
        "farey" => farey(cfg),
        "best-approx" => best_approx(cfg),
        "fiber" => fiber_suite(cfg),
        "upper" => upper(cfg),
        "lower" => lower(cfg),
        "counting-bounds" => counting_bounds(cfg),
        "certificate" => certificate(cfg),
        "bounds" => bounds_suite(cfg),
        _ => Err(Error::OutOfRange(format!("unknown suite '{name}'; known suites: {}", SUITES.join(", ")))),
    }
}

fn field(q: u32) -> Result<Field> {
    Field::of_order(q)
}

// ---------------------------------------------------------------- arithmetic functions

fn phi_sum(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for q in cfg.qs(&[2, 3, 4]) {
        let f = field(q)?;
        for l in 1..=cfg.lmax.unwrap_or(5) {
            let f = f.clone();
            cases.push(case(format!("q={q} l={l}"), move || {
                let mut sum = 0u128;
                let mut direct_agrees = true;
                for g in Poly::of_degree(l as usize, q) {
                    let phi = euler_phi_from(&factor(&g, &f)?, &f)?;
                    if l <= 3 && g.is_monic() {
                        direct_agrees &= phi == euler_phi_direct(&g, &f);
                    }
                    sum += phi;
                }
                let closed = phi_degree_sum_closed(q, l)?;
                outcome(
                    sum == closed && direct_agrees,
                    json!({"sum": sum.to_string(), "closed_form": closed.to_string(), "direct_agrees": direct_agrees}),
                )
            }));
        }
    }
    Ok(cases)
}

fn d1(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for q in cfg.qs(&[2, 3, 4]) {
        let f = field(q)?;
        for l in 1..=cfg.lmax.unwrap_or(5) {
            let f = f.clone();
            cases.push(case(format!("q={q} l={l}"), move || {
                let norm_sq = (q as u128).pow(2 * l);
                let mut sum = 0u128;
                let mut each = true;
                let mut direct_agrees = true;
                for g in Poly::of_degree(l as usize, q) {
                    let fact = factor(&g, &f)?;
                    let phi = euler_phi_from(&fact, &f)?;
                    let d1 = divisor_sum_d1_from(&fact, &f)?;
                    if l <= 3 && g.is_monic() {
                        direct_agrees &= d1 == divisor_sum_d1_direct(&g, &f);
                    }
                    each &= phi * d1 <= norm_sq;
                    sum += phi * d1;
                }
                let bound = phi_d1_degree_bound(q, l)?;
                outcome(
                    sum <= bound && each && direct_agrees,
                    json!({"sum": sum.to_string(), "bound": bound.to_string(), "per_polynomial": each, "direct_agrees": direct_agrees}),
                )
            }));
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- lattices

/// Stream index of sample `i` of a randomized lattice family.
fn stream(tag: u64, q: u32, d: usize, i: usize) -> u64 {
    (tag << 56) | ((q as u64) << 40) | ((d as u64) << 32) | i as u64
}

const MINKOWSKI_TAG: u64 = 1;
const COUNTING_TAG: u64 = 2;
const ISOMETRY_TAG: u64 = 3;

/// Checks `‖Σ r_i ξ_i‖ = max |r_i| λ_i` on a few random coefficient vectors.
fn orthogonal_on_samples<R: Rng>(red: &ReducedLattice, rng: &mut R, f: &Field) -> bool {
    let minima = red.minima_exps();
    (0..5).all(|_| {
        let c: Vec<Poly> = (0..red.rank())
            .map(|_| Poly::from_index(rng.gen_range(0..(f.q() as u64).pow(3)), f.q()))
            .collect();
        let expect = c
            .iter()
            .zip(&minima)
            .filter(|(ci, _)| !ci.is_zero())
            .map(|(ci, l)| ci.deg() + l)
            .max();
        vec_norm(&red.combine(&c, f)).exp() == expect
    })
}

fn minkowski(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let samples = cfg.samples.unwrap_or(200);
    // λ_1 against the exhaustive oracle on the first samples of each family (>= 100 overall)
    let oracle = 17;
    let mut cases = Vec::new();
    for q in cfg.qs(&[2, 3]) {
        let f = field(q)?;
        for d in cfg.ds(&[2, 3, 4]) {
            for i in 0..samples {
                let f = f.clone();
                let seed = cfg.seed;
                cases.push(case(format!("q={q} d={d} #{i}"), move || {
                    let mut rng = case_rng(seed, stream(MINKOWSKI_TAG, q, d, i));
                    let basis = random_basis(&mut rng, d, &f);
                    let red = column_reduce_full(&basis, &f)?;
                    let det = det_exp(&basis, &f)?;
                    let minima = red.minima_exps();
                    let sorted = minima.windows(2).all(|w| w[0] <= w[1]);
                    let orthogonal = orthogonal_on_samples(&red, &mut rng, &f);
                    let shortest = if i < oracle {
                        Some(brute_force_shortest(&basis, DEFAULT_BUDGET, &f)?.exp())
                    } else {
                        None
                    };
                    let shortest_ok = shortest.is_none_or(|s| s == Some(red.lambda1_exp()));
                    outcome(
                        red.covolume_exp() == det && sorted && orthogonal && shortest_ok,
                        json!({"minima": minima, "det": det, "oracle_lambda1": shortest.flatten(), "orthogonal": orthogonal}),
                    )
                }));
            }
        }
    }
    Ok(cases)
}

/// The shared sample of the counting and covering suites.
fn counting_families(cfg: &SuiteConfig) -> Vec<(u32, usize, usize)> {
    let qs = cfg.qs(&[2, 3]);
    let ds = cfg.ds(&[2, 3]);
    let n = cfg.samples.unwrap_or(100);
    (0..n).map(|i| (qs[i % qs.len()], ds[(i / qs.len()) % ds.len()], i)).collect()
}

/// Search budget of the counting oracle; draws needing more are redrawn from the same stream.
const COUNTING_BUDGET: u64 = 2_000_000;

/// Sample `i` of the counting family: the first draw whose exhaustive count at radius
/// `q^2` fits [`COUNTING_BUDGET`].
fn counting_basis(seed: u64, q: u32, d: usize, i: usize, f: &Field) -> Result<LatticeBasis> {
    let mut rng = case_rng(seed, stream(COUNTING_TAG, q, d, i));
    loop {
        let basis = random_basis(&mut rng, d, f);
        let size = hadamard_windows(&basis, 2, f)?
            .iter()
            .try_fold(1u64, |acc, &w| acc.checked_mul((q as u64).checked_pow((w.max(-1) + 1) as u32)?));
        if size.is_some_and(|s| s <= COUNTING_BUDGET) {
            return Ok(basis);
        }
    }
}

fn counting(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for (q, d, i) in counting_families(cfg) {
        let f = field(q)?;
        let seed = cfg.seed;
        cases.push(case(format!("q={q} d={d} #{i}"), move || {
            let basis = counting_basis(seed, q, d, i, &f)?;
            let red = column_reduce_full(&basis, &f)?;
            let mut rows = Vec::new();
            let mut pass = true;
            for r in -2..=2 {
                let formula = red.count_points(r, q)?;
                let enumerated = red.points_in_ball(r, q).count() as u128;
                let brute = brute_force_count(&basis, r, DEFAULT_BUDGET, &f)? as u128;
                pass &= formula == brute && formula == enumerated;
                rows.push(json!({"r": r, "formula": formula.to_string(), "brute_force": brute.to_string()}));
            }
            outcome(pass, json!({"minima": red.minima_exps(), "radii": rows}))
        }));
    }
    Ok(cases)
}

fn covering(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for (q, d, i) in counting_families(cfg) {
        let f = field(q)?;
        let seed = cfg.seed;
        cases.push(case(format!("identities q={q} d={d} #{i}"), move || {
            let basis = counting_basis(seed, q, d, i, &f)?;
            let red = column_reduce_full(&basis, &f)?;
            let e = red.covering_radius_exp();
            let eh = red.covering_radius_plus_hyperplane_exp();
            let ld = red.lambda_last_exp();
            // x·Λ: every radius grows by one power of q
            let scaled = LatticeBasis {
                d,
                columns: basis.columns.iter().map(|c| c.iter().map(|r| r.mul_poly(&Poly::x(), &f)).collect()).collect(),
            };
            let homogeneous = column_reduce_full(&scaled, &f)?.covering_radius_exp() == e + 1;
            // planar lattices: the farthest point from Λ (resp. Λ + H′) found by a grid scan
            let (far, far_line) = if d == 2 {
                (
                    Some(brute_force_farthest_exp(&basis, DEFAULT_BUDGET, &f)? - 1),
                    Some(brute_force_farthest_from_line_exp(&basis, &red.xi(0, &f), DEFAULT_BUDGET, &f)? - 1),
                )
            } else {
                (None, None)
            };
            let pass = e + 2 == ld
                && eh + 2 == ld
                && homogeneous
                && far.is_none_or(|x| x == e)
                && far_line.is_none_or(|x| x == eh);
            outcome(
                pass,
                json!({"lambda_d": ld, "e": e, "e_plus_hyperplane": eh, "oracle_e": far, "oracle_e_plus_hyperplane": far_line, "homogeneous": homogeneous}),
            )
        }));
    }
    let lattices = cfg.samples.map_or(50, |s| s.min(50));
    for i in 0..lattices {
        let q = cfg.qs(&[2, 3])[i % cfg.qs(&[2, 3]).len()];
        let ds = cfg.ds(&[2, 3, 4]);
        let d = ds[i % ds.len()];
        let f = field(q)?;
        let seed = cfg.seed;
        cases.push(case(format!("isometries q={q} d={d} #{i}"), move || {
            let mut rng = case_rng(seed, stream(ISOMETRY_TAG, q, d, i));
            let basis = random_basis(&mut rng, d, &f);
            let e = column_reduce_full(&basis, &f)?.covering_radius_exp();
            let mut moved = Vec::new();
            for _ in 0..20 {
                let g = random_isometry(&mut rng, d, &f);
                moved.push(column_reduce_full(&apply(&g, &basis, &f), &f)?.covering_radius_exp());
            }
            outcome(moved.iter().all(|&m| m == e), json!({"e": e, "isometries": moved.len()}))
        }));
    }
    Ok(cases)
}

// ---------------------------------------------------------------- Farey lattices

/// Representatives of all primitive `u` with `b` monic of degree `n` and `deg a_i < n`,
/// up to permuting coordinates and scaling each `a_i` by a unit (both act on `Λ_u` and
/// on the search defining `r(u)` by isometries of the sup norm).
fn farey_representatives(q: u32, d: usize, n: usize, f: &Field) -> Vec<ApproxPair> {
    let normal: Vec<Poly> = std::iter::once(Poly::zero())
        .chain((0..n).flat_map(|k| Poly::monic_of_degree(k, q)))
        .collect();
    let mut out = Vec::new();
    for b in Poly::monic_of_degree(n, q) {
        let mut idx = vec![0usize; d];
        loop {
            let a: Vec<Poly> = idx.iter().map(|&i| normal[i].clone()).collect();
            if gcd_all(a.iter().chain([&b]), f).is_one() {
                out.push(ApproxPair { a, b: b.clone() });
            }
            // next nondecreasing index tuple
            let Some(pos) = (0..d).rev().find(|&p| idx[p] + 1 < normal.len()) else { break };
            let v = idx[pos] + 1;
            for x in idx.iter_mut().skip(pos) {
                *x = v;
            }
        }
    }
    out
}

fn random_pair<R: Rng>(rng: &mut R, d: usize, n: usize, f: &Field) -> ApproxPair {
    let q = f.q() as u64;
    loop {
        let b = Poly::from_index(rng.gen_range(0..q.pow(n as u32)), f.q())
            .add(&Poly::monomial(1, n), f)
            .scale(rng.gen_range(1..f.q()) as u8, f);
        let a: Vec<Poly> = (0..d).map(|_| Poly::from_index(rng.gen_range(0..q.pow(n as u32 + 1)), f.q())).collect();
        let u = ApproxPair { a, b };
        if u.is_primitive(f) {
            return u;
        }
    }
}

fn farey_check(u: &ApproxPair, f: &Field) -> Result<(bool, i64, Option<i64>)> {
    let fl = farey_lattice(u, f);
    let det = det_exp(&fl.lattice.basis(f), f)?;
    let r = r_of_u_bruteforce(u, f).exp();
    let ok = det == -u.deg() && fl.lattice.covolume_exp() == -u.deg() && Some(fl.r_exp()) == r;
    Ok((ok, det, r))
}

fn farey(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let max_deg = cfg.degree.unwrap_or(4).max(0) as usize;
    let spot = cfg.samples.unwrap_or(200);
    for q in cfg.qs(&[2, 3]) {
        let f = field(q)?;
        for d in cfg.ds(&[1, 2, 3]) {
            for n in 0..=max_deg {
                let f = f.clone();
                let seed = cfg.seed;
                cases.push(case(format!("q={q} d={d} deg b={n}"), move || {
                    let reps = farey_representatives(q, d, n, &f);
                    let mut failures = Vec::new();
                    for u in &reps {
                        let (ok, det, r) = farey_check(u, &f)?;
                        if !ok && failures.len() < 5 {
                            failures.push(json!({"u": u, "det": det, "r": r}));
                        }
                    }
                    // unreduced pairs (any a, any leading unit) drawn at random
                    let mut rng = case_rng(seed, stream(4, q, d, n));
                    let mut spot_ok = true;
                    for _ in 0..spot {
                        spot_ok &= farey_check(&random_pair(&mut rng, d, n, &f), &f)?.0;
                    }
                    outcome(
                        failures.is_empty() && spot_ok,
                        json!({"representatives": reps.len(), "random_pairs": spot, "failures": failures}),
                    )
                }));
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- best approximations

fn best_approx_laws(theta: &[RatFn], bound: i64, invariance_deg: i64, f: &Field) -> Result<Value> {
    let q = f.q();
    let seq = best_approx_sequence(&theta_from_ratfns(theta, bound, f), bound, f)?;
    let exact = best_approx_sequence_exact(theta, bound, f)?;
    let routes_agree = seq == exact;
    let us: Vec<&ApproxPair> = seq.pairs().collect();
    let quality: Vec<QNorm> = seq.entries.iter().map(|e| e.quality.exact().unwrap_or(QNorm::ZERO)).collect();
    let monotone = us.first().is_some_and(|u| u.deg() == 0)
        && us.windows(2).all(|w| w[0].deg() < w[1].deg())
        && quality.windows(2).all(|w| w[0] > w[1]);
    let r: Vec<QNorm> = us.iter().map(|u| r_of_u_bruteforce(u, f)).collect();
    // A(û_{i+j}, u_i) = A(θ, u_i) = r(u_{i+1})
    let mut chain = true;
    for i in 0..us.len() {
        if i + 1 < us.len() {
            chain &= quality[i] == r[i + 1];
        }
        for j in i + 1..us.len() {
            chain &= approx_quality_exact(&us[j].hat(f), us[i], f) == quality[i];
        }
    }
    // A(θ, u) <= r(u) on the sequence; A(θ, u) < r(u) forces membership
    let mut sandwich = quality.iter().zip(&r).all(|(a, r)| a <= r);
    for n in 0..=bound as usize {
        for b in Poly::monic_of_degree(n, q) {
            let a: Vec<Poly> = theta.iter().map(|t| t.mul_poly(&b, f).poly_part(f)).collect();
            let u = ApproxPair { a, b };
            if u.is_primitive(f) && approx_quality_exact(theta, &u, f) < r_of_u_bruteforce(&u, f) {
                sandwich &= us.iter().any(|w| **w == u);
            }
        }
    }
    // A(θ, v) = A(û, v) for |v| <= |u|, v ∉ F_q^* u
    let mut invariance = true;
    for u in us.iter().filter(|u| u.deg() <= invariance_deg) {
        let hat = u.hat(f);
        for n in 0..=u.deg() as usize {
            for b in Poly::monic_of_degree(n, q) {
                let base: Vec<Poly> = theta.iter().map(|t| t.mul_poly(&b, f).poly_part(f)).collect();
                let total = (q as u64).pow(theta.len() as u32);
                for idx in 0..total {
                    let mut k = idx;
                    let a: Vec<Poly> = base
                        .iter()
                        .map(|p| {
                            let c = (k % q as u64) as u8;
                            k /= q as u64;
                            p.add(&Poly::constant(c), f)
                        })
                        .collect();
                    let v = ApproxPair { a, b: b.clone() };
                    if !v.is_primitive(f) || v.same_orbit(u, f) {
                        continue;
                    }
                    invariance &= approx_quality_exact(theta, &v, f) == approx_quality_exact(&hat, &v, f);
                }
            }
        }
    }
    // unit multiples leave every quality unchanged
    let orbit = us
        .iter()
        .zip(&quality)
        .all(|(u, a)| f.units().all(|c| approx_quality_exact(theta, &u.scale(c, f), f) == *a));
    Ok(json!({
        "entries": us.len(),
        "routes_agree": routes_agree,
        "monotone": monotone,
        "chain": chain,
        "sandwich": sandwich,
        "invariance": invariance,
        "orbit": orbit,
    }))
}

fn best_approx(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let max_deg = cfg.degree.unwrap_or(4);
    for q in cfg.qs(&[2]) {
        let f = field(q)?;
        for d in cfg.ds(&[1, 2]) {
            for n in 0..=max_deg as usize {
                for b in Poly::monic_of_degree(n, q) {
                    let f = f.clone();
                    cases.push(case(format!("q={q} d={d} b={:?}", b.coeffs()), move || {
                        let mut checked = 0usize;
                        let mut bad = Vec::new();
                        let total = (q as u64).pow((n * d) as u32);
                        for idx in 0..total {
                            let mut k = idx;
                            let a: Vec<Poly> = (0..d)
                                .map(|_| {
                                    let p = Poly::from_index(k % (q as u64).pow(n as u32), q);
                                    k /= (q as u64).pow(n as u32);
                                    p
                                })
                                .collect();
                            if !gcd_all(a.iter().chain([&b]), &f).is_one() {
                                continue;
                            }
                            let theta: Vec<RatFn> =
                                a.iter().map(|p| RatFn::new(p.clone(), b.clone(), &f)).collect::<Result<_>>()?;
                            let v = best_approx_laws(&theta, n as i64, 3, &f)?;
                            checked += 1;
                            let ok = ["routes_agree", "monotone", "chain", "sandwich", "invariance", "orbit"]
                                .iter()
                                .all(|k| v[k] == json!(true));
                            if !ok && bad.len() < 3 {
                                bad.push(json!({"a": a, "laws": v}));
                            }
                        }
                        outcome(bad.is_empty(), json!({"thetas": checked, "failures": bad}))
                    }));
                }
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- fibers

fn sort_pairs(mut v: Vec<ApproxPair>) -> Vec<ApproxPair> {
    v.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
    v
}

fn fiber_suite(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let samples = cfg.samples.unwrap_or(4);
    let kmax = cfg.cutoff.unwrap_or(3).max(0) as u32;
    for q in cfg.qs(&[2, 3]) {
        let f = field(q)?;
        for d in cfg.ds(&[1, 2]) {
            for n in 1..=2usize {
                for i in 0..samples {
                    let f = f.clone();
                    let seed = cfg.seed;
                    cases.push(case(format!("q={q} d={d} deg b={n} #{i}"), move || {
                        let u = random_pair(&mut case_rng(seed, stream(5, q, d, n * 1000 + i)), d, n, &f);
                        let fl = farey_lattice(&u, &f);
                        let mut alphas: Vec<(Vec<Poly>, bool)> = Vec::new();
                        for j in 0..d {
                            let mut c = vec![Poly::zero(); d];
                            c[j] = Poly::one();
                            alphas.push((c.clone(), true));
                            c[j] = Poly::x();
                            alphas.push((c, false));
                        }
                        let mut all = vec![Poly::from_coeffs([1, 1]); d];
                        all[0] = Poly::one();
                        alphas.push((all, true));
                        let mut rows = Vec::new();
                        let mut pass = true;
                        for (c, primitive) in &alphas {
                            let alpha = fl.lattice.combine(c, &f);
                            for k in 0..=kmax {
                                let param = sort_pairs(fiber(&u, &alpha, k, false, &f)?);
                                let scan = sort_pairs(fiber_exhaustive(&u, &alpha, k, &f));
                                let expected = (q as usize - 1) * (q as usize).pow(k);
                                let count_ok = if *primitive { param.len() == expected } else { param.len() <= expected };
                                pass &= param == scan && count_ok;
                                rows.push(json!({"alpha": c, "primitive": primitive, "k": k, "count": param.len(), "scan": scan.len()}));
                            }
                        }
                        outcome(pass, json!({"u": u, "fibers": rows}))
                    }));
                }
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- upper structure

fn upper(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let cutoff = cfg.cutoff.unwrap_or(3);
    for q in cfg.qs(&[2]) {
        let f = field(q)?;
        for d in cfg.ds(&[2]) {
            for eps in cfg.eps_list(&[rat(1, 16), rat(1, 64)])? {
                let root = UpperNode::new(&ApproxPair::root(d), &f);
                // the root and its first children in the shell |v| = q|u|
                let mut nodes = vec![root.clone()];
                if let Some(shell) = enumerate_d(&root, 1, &f)?.into_iter().nth(1) {
                    nodes.extend(shell.members.iter().take(2).map(|v| UpperNode::new(v, &f)));
                }
                for node in nodes {
                    let f = f.clone();
                    let eps = eps.clone();
                    cases.push(case(format!("q={q} d={d} eps={} u={:?}", fmt_rational(&eps), node.u()), move || {
                        let s = round_up_dyadic(bounds::upper_bound(q, d, &eps)?, 10);
                        let di = d as i64;
                        let (sn, sd): (i64, i64) = (s.numer().try_into().unwrap(), s.denom().try_into().unwrap());
                        let t = QExp::new(sn * (di + 1), sd * di);
                        let cs = child_sum_d(&node, t, cutoff, &f)?;
                        let mut pass = cs.holds && cs.shells_within_bounds;
                        let mut e_sums = 0;
                        for shell in cs.shells.iter().take(2) {
                            for v in &shell.members {
                                let es = child_sum_e(&node, v, &eps, t, cutoff, &f)?;
                                pass &= es.holds && es.shells_within_bounds;
                                e_sums += 1;
                            }
                        }
                        let cr = contraction_check(&node, &s, &eps, cutoff, &f)?;
                        pass &= cr.holds;
                        outcome(
                            pass,
                            json!({"s": fmt_rational(&s), "d_sum": cs.partial, "d_closed_form": cs.closed_form, "e_sums_checked": e_sums, "contraction_total": cr.total, "contraction_holds": cr.holds}),
                        )
                    }));
                }
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- lower structure

fn lower(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let q = cfg.q.unwrap_or(2);
    let d = cfg.d.unwrap_or(2);
    let eps = cfg.eps_list(&[rat(1, 4)])?.remove(0);
    let n_max = cfg.n_max.unwrap_or(1);
    let f = field(q)?;
    let root = LowerNode::root(d, &f);
    let name = format!("q={q} d={d} eps={} N={n_max}", fmt_rational(&eps));
    let (f2, root2, eps2) = (f.clone(), root.clone(), eps.clone());
    Ok(vec![
        case(format!("children {name}"), move || {
            let kids = enumerate_children(&root, &eps, n_max, &f)?;
            let mut failing = Vec::new();
            let mut window = 0;
            let mut nested = 0;
            for c in &kids {
                let checks = check_child(&root, &c.v, &eps, &f)?;
                let node = LowerNode::new(&c.v, &f);
                window += node.in_lambda_window(&eps, q) as usize;
                nested += verify_nesting(&root, &node, &f).holds() as usize;
                if !checks.all() && failing.len() < 5 {
                    failing.push(json!({"v": c.v, "checks": checks}));
                }
            }
            let tw = t_window(&root, &eps, n_max, &f);
            outcome(
                !kids.is_empty() && failing.is_empty() && window == kids.len() && nested == kids.len(),
                json!({"children": kids.len(), "lambda_window": window, "nested": nested, "t_window": tw, "failures": failing}),
            )
        }),
        case(format!("separation {name}"), move || {
            let kids: Vec<ApproxPair> =
                enumerate_children(&root2, &eps2, n_max, &f2)?.into_iter().map(|c| c.v).collect();
            let rep = verify_separation(&root2, &kids, &eps2, n_max, &f2)?;
            outcome(rep.bound_holds && rep.distances_are_center_distances, serde_json::to_value(&rep).unwrap())
        }),
    ])
}

/// Largest power of `q` not above `ε`.
fn snap(eps: &BigRational, q: u32) -> BigRational {
    qpow_rat(q, floor_log(q, eps))
}

fn counting_bounds(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let lmax = cfg.lmax.unwrap_or(3);
    for q in cfg.qs(&[2, 3]) {
        let f = field(q)?;
        for d in cfg.ds(&[2, 3]) {
            let eps_list: Vec<BigRational> = match &cfg.eps {
                Some(s) => vec![parse_rational(s)?],
                None => vec![rat(1, 4), snap(&rat(1, 9), q)],
            };
            for eps in eps_list {
                for l in 0..=lmax {
                    let (f, eps) = (f.clone(), eps.clone());
                    cases.push(case(format!("X_n q={q} d={d} eps={} deg n={l}", fmt_rational(&eps)), move || {
                        let root = LowerNode::root(d, &f);
                        let sum = xn_degree_sum(&root, l, &eps, &f)?;
                        let failures: Vec<_> = sum.failures.iter().take(3).collect();
                        outcome(
                            sum.each_holds && sum.holds,
                            json!({
                                "sum": sum.sum.to_string(),
                                "bound": fmt_rational(&sum.bound),
                                "each_holds": sum.each_holds,
                                "failing_n": sum.failures.len(),
                                "first_failures": failures,
                            }),
                        )
                    }));
                }
                let (f, eps) = (f.clone(), eps.clone());
                cases.push(case(format!("shell alphas q={q} d={d} eps={}", fmt_rational(&eps)), move || {
                    let root = LowerNode::root(d, &f);
                    let t0 = t_window(&root, &eps, 0, &f).t0;
                    let mut rows = Vec::new();
                    let mut pass = true;
                    for k in t0..=t0 + 2 {
                        let c = shell_alpha_count(&root, &eps, k, &f)?;
                        pass &= c.holds == Some(true);
                        rows.push(c);
                    }
                    outcome(pass, json!({"t0": t0, "shells": rows}))
                }));
            }
        }
    }
    let q = cfg.q.unwrap_or(2);
    let d = cfg.d.unwrap_or(2);
    let eps = cfg.eps_list(&[rat(1, 4)])?.remove(0);
    let n_max = cfg.n_max.unwrap_or(1);
    let f = field(q)?;
    cases.push(case(format!("F_N sum q={q} d={d} eps={} N={n_max} s=4/3", fmt_rational(&eps)), move || {
        let rep = f_n_sum_check(&LowerNode::root(d, &f), &eps, n_max, &bounds::base_dim(d)?, &f)?;
        outcome(rep.holds, serde_json::to_value(&rep).unwrap())
    }));
    Ok(cases)
}

fn certificate(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let q = cfg.q.unwrap_or(2);
    let d = cfg.d.unwrap_or(2);
    let eps = cfg.eps_list(&[rat(1, 4)])?.remove(0);
    let n_max = cfg.n_max.unwrap_or(1);
    let steps = cfg.steps.unwrap_or(4);
    let f = field(q)?;
    Ok(vec![case(format!("di q={q} d={d} eps={} N={n_max} steps={steps}", fmt_rational(&eps)), move || {
        let cert = build_di_certificate(&eps, n_max, steps, &ApproxPair::root(d), Chooser::LexicographicFirst, &f)?;
        let json = cert.to_json();
        let replay = replay_certificate(&json)?;
        outcome(
            cert.passes() && replay.ok(),
            json!({"links": cert.links.len(), "passes": cert.passes(), "dirichlet": cert.dirichlet, "replay": replay, "checksum": cert.checksum}),
        )
    })])
}

// ---------------------------------------------------------------- bounds

/// Documented values, exact regions, monotonicity and the small-`ε` limit.
fn bounds_suite(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    let mut cases = vec![
        case("documented values".into(), || {
            let u = bounds::upper_bound(2, 2, &rat(1, 16))?;
            let l = bounds::lower_bound(2, 2, &rat(1, 4))?;
            outcome(
                (u - 1.871568).abs() <= 1e-5 && (l - 1.333392).abs() <= 1e-5,
                json!({"upper(2,2,1/16)": u, "lower(2,2,1/4)": l}),
            )
        }),
        case("limit at eps=2^-20".into(), || {
            let eps = qpow_rat(2, -20);
            let u = bounds::upper_excess(2, 2, &eps)?;
            let l = bounds::lower_excess(2, 2, &eps)?;
            outcome(u.abs() <= 1e-6 && l.abs() <= 1e-6, json!({"upper_minus_base": u, "lower_minus_base": l, "tolerance": 1e-6}))
        }),
    ];
    for q in cfg.qs(&[2, 3]) {
        for d in cfg.ds(&[2, 3]) {
            cases.push(case(format!("regions and shape q={q} d={d}"), move || {
                let regions = bounds::regions(q, d)?;
                let grid = bounds::q_power_grid(q, 1, 16);
                let rows = bounds::bounds_table(q, d, &grid)?;
                let increasing = bounds::lower_increasing_on_grid(q, d, &grid)?;
                let dd = d as f64;
                let upper_edge = rows.iter().all(|r| (r.upper <= dd + bounds::TOLERANCE) == r.upper_nontrivial || (r.upper - dd).abs() < 1e-9);
                let ordered = rows.iter().all(|r| r.lower.is_none_or(|l| r.base <= l && l <= r.upper));
                // 0 <= bound − base <= C ε^p with the limiting constant C, since log(1+x) <= x
                let mut upper_rate = true;
                let mut lower_rate = true;
                for e in &grid {
                    let ef = crate::qexp::to_f64(e);
                    let u = bounds::upper_excess(q, d, e)?;
                    upper_rate &= u >= 0.0 && u <= bounds::upper_rate(q, d) * ef.powf(dd / 2.0) * (1.0 + 1e-12);
                    if let Ok(l) = bounds::lower_excess(q, d, e) {
                        lower_rate &= l >= 0.0 && l <= bounds::lower_rate(q, d) * ef.powf(dd) * (1.0 + 1e-12);
                    }
                }
                let exact_edges = if (q, d) == (2, 2) {
                    regions.lower_monotone_edge.base == rat(1, 3) && regions.upper_nontrivial_edge == rat(1, 12)
                } else {
                    true
                };
                outcome(
                    increasing && upper_edge && ordered && upper_rate && lower_rate && exact_edges,
                    json!({"regions": regions, "lower_increasing": increasing, "upper_region_exact": upper_edge, "lower_le_upper": ordered, "rates_bounded": upper_rate && lower_rate}),
                )
            }));
        }
    }
    cases.push(case("empty grid".into(), || {
        let csv = bounds::to_csv(&[])?;
        outcome(csv.lines().count() == 1, json!({"csv": csv}))
    }));
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(build_suite("unknown", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn phi_sum_documented_run() {
        let cfg = SuiteConfig { q: Some(2), lmax: Some(5), ..Default::default() };
        let rep = run_suite("phi-sum", &cfg).unwrap();
        assert_eq!(rep.cases, 5);
        assert!(rep.pass);
    }

    #[test]
    fn farey_representatives_cover_small_case() {
        let f = Field::of_order(2).unwrap();
        // d = 1, deg b = 1: b ∈ {x, x+1}, a ∈ {0, 1}, primitive: a = 1
        assert_eq!(farey_representatives(2, 1, 1, &f).len(), 2);
    }
}
