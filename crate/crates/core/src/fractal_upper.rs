//! The covering structure `(Q_ε, σ_ε, B)` behind the upper bound.
//!
//! For `u ∈ Q`:
//! * `D(u)`: pairs `v` with `|u| <= |v|`, `v ∈ H_u` and `‖û − v̂‖ <= λ_1(Λ_u)/|u|`;
//! * `E(u, v, ε)`: pairs `w` with `|v| < |w|`, `w ∉ H_u` and `‖v̂ − ŵ‖ < ε / (|v| |w|^{1/d})`;
//! * `σ_ε(u) = ⋃_{v ∈ D(u)} E(u, v, ε)`, `Q_ε = {u : λ̂_1(Λ_u) < ε}`, `B(u) = B(û, |u|^{-1-1/d})`.
//!
//! Shells are enumerated through the fibers of `π_u` (resp. `π_v`) over lattice points
//! in balls, listing one representative with monic `b` per `F_q^*`-orbit; counts and
//! sums include every orbit member, as the sets above are subsets of `Q`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::diophantine::{
    best_approx_sequence, best_approx_sequence_exact, farey_lattice, fiber, hat_distance, ApproxPair, BestApproxSeq,
    FareyLattice,
};
use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::laurent::{lvec_exact, LVec};
use crate::qexp::{cmp_qpow, floor_log, fmt_rational, geometric_tail, qpow_rat, rat, rat_pow, Enclosure, QExp, QPowCache};

/// A node of the covering structure: `u` with its reduced Farey lattice.
#[derive(Clone, Debug)]
pub struct UpperNode {
    pub farey: FareyLattice,
}

impl UpperNode {
    pub fn new(u: &ApproxPair, f: &Field) -> Self {
        UpperNode { farey: farey_lattice(u, f) }
    }
    pub fn u(&self) -> &ApproxPair {
        &self.farey.u
    }
    pub fn d(&self) -> usize {
        self.farey.d()
    }
    pub fn deg(&self) -> i64 {
        self.farey.u_exp()
    }
    /// `log_q` of the radius `|u|^{-(1+1/d)}` of `B(u)`.
    pub fn radius_exp(&self) -> QExp {
        -QExp::new(self.deg() * (self.d() as i64 + 1), self.d() as i64)
    }
    pub fn lambda_hat1_exp(&self) -> QExp {
        self.farey.lambda_hat1_exp()
    }
    /// `u ∈ Q_ε`.
    pub fn in_q_eps(&self, eps: &BigRational, q: u32) -> bool {
        cmp_qpow(q, self.lambda_hat1_exp(), eps) == Ordering::Less
    }
}

/// One shell `|v| = q^k |u|` (or `q^k |v|` for `E`): orbit representatives and counts.
#[derive(Clone, Debug, Serialize)]
pub struct Shell {
    pub k: i64,
    /// Representatives with monic `b`.
    pub members: Vec<ApproxPair>,
    /// Number of elements of `Q` in the shell (`(q − 1)` per representative).
    pub count: u128,
    /// The per-shell bound used in the summation estimate.
    #[serde(with = "crate::qexp::serde_rational")]
    pub bound: BigRational,
}

impl Shell {
    pub fn within_bound(&self) -> bool {
        BigRational::from_integer(self.count.into()) <= self.bound
    }
}

fn units(q: u32) -> u128 {
    q as u128 - 1
}

/// `(q − 1) q^{d−1} q^{kd}`: the bound on `#D_k(u)`.
pub fn d_shell_bound(q: u32, d: usize, k: i64) -> BigRational {
    let d = d as i64;
    qpow_rat(q, d - 1 + k * d) * rat(q as i64 - 1, 1)
}

/// `(q − 1)(q + q²)^d ε^d q^{kd}`: the bound on `#E_k(u, v, ε)`.
pub fn e_shell_bound(q: u32, d: usize, eps: &BigRational, k: i64) -> BigRational {
    let qq = q as i64;
    rat(qq - 1, 1) * rat_pow(&rat(qq + qq * qq, 1), d as i64) * rat_pow(eps, d as i64) * qpow_rat(q, k * d as i64)
}

/// Iterates the coefficient vectors `c` with `deg c_i <= w_i` (empty window: only 0).
fn boxes(windows: &[i64], q: u32) -> impl Iterator<Item = Vec<Poly>> {
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

fn sort_dedup(mut v: Vec<ApproxPair>) -> Vec<ApproxPair> {
    v.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
    v.dedup();
    v
}

/// `v ∈ D(u)`, decided exactly.
pub fn in_d(node: &UpperNode, v: &ApproxPair, f: &Field) -> bool {
    let u = node.u();
    v.is_primitive(f)
        && u.deg() <= v.deg()
        && node.farey.in_h_u(v, f)
        && hat_distance(u, v, f) <= crate::qexp::QNorm::pow(node.farey.r_exp() - u.deg())
}

/// The strict inequality `‖v̂ − ŵ‖ < ε / (|v| |w|^{1/d})`, as `(‖v̂ − ŵ‖ |v|)^d |w| < ε^d`.
pub fn e_norm_condition(v: &ApproxPair, w: &ApproxPair, eps: &BigRational, f: &Field) -> bool {
    let d = v.d() as i64;
    match hat_distance(v, w, f).exp() {
        None => true,
        Some(h) => cmp_qpow(f.q(), QExp::from_integer(d * (h + v.deg()) + w.deg()), &rat_pow(eps, d)) == Ordering::Less,
    }
}

/// `w ∈ E(u, v, ε)`, decided exactly.
pub fn in_e(node: &UpperNode, v: &ApproxPair, w: &ApproxPair, eps: &BigRational, f: &Field) -> bool {
    w.is_primitive(f) && v.deg() < w.deg() && !node.farey.in_h_u(w, f) && e_norm_condition(v, w, eps, f)
}

/// Shells `k = 0..=cutoff` of `D(u)`, via fibers of `π_u` over `B(0, q^k λ_1) ∩ Λ'_u`.
pub fn enumerate_d(node: &UpperNode, cutoff: i64, f: &Field) -> Result<Vec<Shell>> {
    let q = f.q();
    let d = node.d();
    let u = node.u();
    let minima = node.farey.minima_exps();
    let l1 = minima[0];
    let mut shells = Vec::new();
    for k in 0..=cutoff {
        let mut members = Vec::new();
        // coefficients on ξ_1..ξ_{d-1}; the ξ_d coefficient is 0
        let windows: Vec<i64> = (0..d).map(|i| if i + 1 < d { k + l1 - minima[i] } else { -1 }).collect();
        for c in boxes(&windows, q) {
            let alpha = node.farey.lattice.combine(&c, f);
            for v in fiber(u, &alpha, k as u32, true, f)? {
                if in_d(node, &v, f) {
                    members.push(v);
                }
            }
        }
        let members = sort_dedup(members);
        let count = members.len() as u128 * units(q);
        shells.push(Shell { k, members, count, bound: d_shell_bound(q, d, k) });
    }
    Ok(shells)
}

/// Largest `e` with `q^{e d + deg v − k(d−1)} < ε^d`: every `π_v(w)` for `w` in shell `k`
/// of `E(u, v, ε)` has norm `<= q^e`.
fn e_radius_exp(v_deg: i64, d: usize, k: i64, eps: &BigRational, q: u32) -> i64 {
    let d = d as i64;
    let eps_d = rat_pow(eps, d);
    let mut e = (floor_log(q, &eps_d) + 1 + k * (d - 1) - v_deg).div_euclid(d) + 1;
    while cmp_qpow(q, QExp::from_integer(e * d + v_deg - k * (d - 1)), &eps_d) != Ordering::Less {
        e -= 1;
    }
    e
}

/// Shells `k = 1..=cutoff` of `E(u, v, ε)`, via fibers of `π_v` over `Λ_v ∩ B(0, q^e)`,
/// filtered by `w ∉ H_u` and the exact norm condition.
pub fn enumerate_e(node: &UpperNode, v: &ApproxPair, eps: &BigRational, cutoff: i64, f: &Field) -> Result<Vec<Shell>> {
    if !in_d(node, v, f) {
        return Err(Error::OutOfRange("v is not in D(u)".into()));
    }
    let q = f.q();
    let d = node.d();
    let fv = farey_lattice(v, f);
    let mut shells = Vec::new();
    for k in 1..=cutoff {
        let e = e_radius_exp(v.deg(), d, k, eps, q);
        let mut members = Vec::new();
        for c in fv.lattice.points_in_ball(e, q) {
            if c.iter().all(Poly::is_zero) {
                continue;
            }
            let beta = fv.lattice.combine(&c, f);
            for w in fiber(&fv.u, &beta, k as u32, true, f)? {
                if in_e(node, v, &w, eps, f) {
                    members.push(w);
                }
            }
        }
        let members = sort_dedup(members);
        let count = members.len() as u128 * units(q);
        shells.push(Shell { k, members, count, bound: e_shell_bound(q, d, eps, k) });
    }
    Ok(shells)
}

/// A truncated child sum with a certified tail and the closed-form bound.
#[derive(Clone, Debug, Serialize)]
pub struct ChildSum {
    pub t: String,
    pub cutoff: i64,
    /// Exact sum over the enumerated shells (an enclosure when `t` is not an integer).
    pub partial: Enclosure,
    /// Bound on the contribution of the shells beyond the cutoff.
    pub tail: Enclosure,
    pub closed_form: Enclosure,
    pub shells: Vec<Shell>,
    /// Every shell count is within its per-shell bound.
    pub shells_within_bounds: bool,
    /// `partial + tail <= closed_form`, certified.
    pub holds: bool,
}

fn check_t(t: QExp, d: usize) -> Result<()> {
    if t <= QExp::from_integer(d as i64) {
        return Err(Error::OutOfRange(format!("t = {t} must exceed d = {d}")));
    }
    Ok(())
}

fn shells_sum(shells: &[Shell], t: QExp, q: u32, cache: &mut QPowCache) -> Enclosure {
    shells.iter().fold(Enclosure::zero(), |acc, s| {
        if s.count == 0 {
            return acc;
        }
        let term = cache.get(q, -t * s.k).scale(&BigRational::from_integer(s.count.into()));
        acc.add(&term)
    })
}

fn qpow_minus_one(q: u32, e: QExp, cache: &mut QPowCache) -> Enclosure {
    cache.get(q, e).sub(&Enclosure::exact(BigRational::one()))
}

/// `(q − 1) q^{t−1} / (q^{t−d} − 1)`.
pub fn d_closed_form(q: u32, d: usize, t: QExp, cache: &mut QPowCache) -> Enclosure {
    let num = cache.get(q, t - 1).scale(&rat(q as i64 - 1, 1));
    num.mul_nonneg(&qpow_minus_one(q, t - d as i64, cache).recip_pos())
}

/// `(q − 1)(q + q²)^d ε^d / (q^{t−d} − 1)`.
pub fn e_closed_form(q: u32, d: usize, eps: &BigRational, t: QExp, cache: &mut QPowCache) -> Enclosure {
    let c = e_shell_bound(q, d, eps, 0);
    qpow_minus_one(q, t - d as i64, cache).recip_pos().scale(&c)
}

fn d_tail(q: u32, d: usize, t: QExp, cutoff: i64, cache: &mut QPowCache) -> Enclosure {
    geometric_tail(q, &d_shell_bound(q, d, 0), t - d as i64, cutoff + 1, cache)
}

fn e_tail(q: u32, d: usize, eps: &BigRational, t: QExp, cutoff: i64, cache: &mut QPowCache) -> Enclosure {
    geometric_tail(q, &e_shell_bound(q, d, eps, 0), t - d as i64, cutoff + 1, cache)
}

fn finish(t: QExp, cutoff: i64, shells: Vec<Shell>, partial: Enclosure, tail: Enclosure, closed_form: Enclosure) -> ChildSum {
    let shells_within_bounds = shells.iter().all(Shell::within_bound);
    let holds = partial.add(&tail).hi <= closed_form.lo;
    ChildSum { t: t.to_string(), cutoff, partial, tail, closed_form, shells, shells_within_bounds, holds }
}

/// `Σ_{v ∈ D(u), |v| <= q^cutoff |u|} (|u|/|v|)^t` against `(q−1)q^{t−1}/(q^{t−d}−1)`.
pub fn child_sum_d(node: &UpperNode, t: QExp, cutoff: i64, f: &Field) -> Result<ChildSum> {
    let (q, d) = (f.q(), node.d());
    check_t(t, d)?;
    let mut cache = QPowCache::new();
    let shells = enumerate_d(node, cutoff, f)?;
    let partial = shells_sum(&shells, t, q, &mut cache);
    let tail = d_tail(q, d, t, cutoff, &mut cache);
    let closed = d_closed_form(q, d, t, &mut cache);
    Ok(finish(t, cutoff, shells, partial, tail, closed))
}

/// `Σ_{w ∈ E(u,v,ε), |w| <= q^cutoff |v|} (|v|/|w|)^t` against `(q−1)(q+q²)^d ε^d/(q^{t−d}−1)`.
pub fn child_sum_e(
    node: &UpperNode,
    v: &ApproxPair,
    eps: &BigRational,
    t: QExp,
    cutoff: i64,
    f: &Field,
) -> Result<ChildSum> {
    let (q, d) = (f.q(), node.d());
    check_t(t, d)?;
    let mut cache = QPowCache::new();
    let shells = enumerate_e(node, v, eps, cutoff, f)?;
    let partial = shells_sum(&shells, t, q, &mut cache);
    let tail = e_tail(q, d, eps, t, cutoff, &mut cache);
    let closed = e_closed_form(q, d, eps, t, &mut cache);
    Ok(finish(t, cutoff, shells, partial, tail, closed))
}

/// Result of the contraction inequality `Σ_{w ∈ σ_ε(u)} (|u|/|w|)^{(1+1/d)s} <= 1`.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub s: String,
    pub t: String,
    pub eps: String,
    pub cutoff: i64,
    /// Orbit representatives of the enumerated part of `σ_ε(u)`.
    pub sigma_members: usize,
    pub partial: Enclosure,
    pub tail: Enclosure,
    pub total: Enclosure,
    /// The product of the two closed forms.
    pub closed_form: Enclosure,
    pub holds: bool,
}

/// Sums `(|u|/|w|)^t`, `t = (d+1)s/d`, over the enumerated part of `σ_ε(u)` (shells up to
/// `cutoff` for both `v` and `w`, deduplicated) and adds a certified tail: the `E`-tail
/// beyond `cutoff` for every enumerated `v`, plus the `D`-tail times the full `E` bound.
pub fn contraction_check(node: &UpperNode, s: &BigRational, eps: &BigRational, cutoff: i64, f: &Field) -> Result<ContractionReport> {
    let (q, d) = (f.q(), node.d());
    let di = d as i64;
    let lo = rat(di * di, di + 1);
    if *s <= lo || *s > rat(di, 1) {
        return Err(Error::OutOfRange(format!("s = {} must lie in (d²/(d+1), d]", fmt_rational(s))));
    }
    let s_exp = QExp::new(
        s.numer().try_into().map_err(|_| Error::TooLarge("s numerator".into()))?,
        s.denom().try_into().map_err(|_| Error::TooLarge("s denominator".into()))?,
    );
    let t = s_exp * QExp::new(di + 1, di);
    let mut cache = QPowCache::new();
    let d_shells = enumerate_d(node, cutoff, f)?;
    let mut sigma: BTreeSet<(Poly, Vec<Poly>)> = BTreeSet::new();
    let mut tail = Enclosure::zero();
    let e_tail_v = e_tail(q, d, eps, t, cutoff, &mut cache);
    for shell in &d_shells {
        for v in &shell.members {
            for es in enumerate_e(node, v, eps, cutoff, f)? {
                for w in es.members {
                    sigma.insert((w.b, w.a));
                }
            }
            // (q − 1) orbit members of v, each with the same E-set
            let weight = cache.get(q, -t * shell.k).scale(&rat(q as i64 - 1, 1));
            tail = tail.add(&weight.mul_nonneg(&e_tail_v));
        }
    }
    let e_full = e_closed_form(q, d, eps, t, &mut cache);
    tail = tail.add(&d_tail(q, d, t, cutoff, &mut cache).mul_nonneg(&e_full));
    let mut partial = Enclosure::zero();
    for (b, _) in &sigma {
        let k = b.deg() - node.deg();
        partial = partial.add(&cache.get(q, -t * k).scale(&rat(q as i64 - 1, 1)));
    }
    let total = partial.add(&tail);
    let closed_form = d_closed_form(q, d, t, &mut cache).mul_nonneg(&e_full);
    let holds = total.hi <= BigRational::one();
    Ok(ContractionReport {
        s: fmt_rational(s),
        t: t.to_string(),
        eps: fmt_rational(eps),
        cutoff,
        sigma_members: sigma.len(),
        partial,
        tail,
        total,
        closed_form,
        holds,
    })
}

/// A verified link `u_{n_i} → u_{n_{i+1}}` of a `σ_ε`-admissible subsequence.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleLink {
    pub u_index: usize,
    pub v_index: usize,
    pub w_index: usize,
    pub v_in_d: bool,
    pub w_in_e: bool,
    pub w_in_q_eps: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleReport {
    pub eps: String,
    pub entries: usize,
    /// Per best approximation: membership in `Q_ε`.
    pub in_q_eps: Vec<bool>,
    /// First index from which every computed best approximation lies in `Q_ε`.
    pub start: Option<usize>,
    pub links: Vec<AdmissibleLink>,
    /// The horizon ended before the next `H_u`-escape.
    pub horizon_exhausted: bool,
    /// `θ` is rational (some `A(θ, u) = 0`).
    pub rational: bool,
    /// Only the absence of a relation below the degree bound can be observed.
    pub independence_note: String,
}

impl AdmissibleReport {
    pub fn all_links_verified(&self) -> bool {
        self.links.iter().all(|l| l.v_in_d && l.w_in_e && l.w_in_q_eps)
    }
}

/// Extracts the subsequence `u_{n_1}, u_{n_2}, …` of best approximations where `n_{i+1}`
/// is the first index after `n_i` with `u ∉ H_{u_{n_i}}`, and re-verifies every link
/// `u_{n_{i+1}} ∈ E(u_{n_i}, u_{n_{i+1}−1}, ε)` with `u_{n_{i+1}−1} ∈ D(u_{n_i})`.
pub fn admissible_from_theta(theta: &LVec, eps: &BigRational, degree_bound: i64, f: &Field) -> Result<AdmissibleReport> {
    let seq: BestApproxSeq = match lvec_exact(theta) {
        Some(exact) => best_approx_sequence_exact(&exact, degree_bound, f)?,
        None => best_approx_sequence(theta, degree_bound, f)?,
    };
    admissible_from_sequence(&seq, eps, f)
}

pub fn admissible_from_sequence(seq: &BestApproxSeq, eps: &BigRational, f: &Field) -> Result<AdmissibleReport> {
    let q = f.q();
    let nodes: Vec<UpperNode> = seq.pairs().map(|u| UpperNode::new(u, f)).collect();
    let in_q: Vec<bool> = nodes.iter().map(|n| n.in_q_eps(eps, q)).collect();
    let start = match in_q.iter().rposition(|b| !b) {
        None if !in_q.is_empty() => Some(0),
        Some(i) if i + 1 < in_q.len() => Some(i + 1),
        _ => None,
    };
    let mut links = Vec::new();
    let mut horizon_exhausted = start.is_none();
    if let Some(mut cur) = start {
        loop {
            let node = &nodes[cur];
            let next = (cur + 1..nodes.len()).find(|&m| !node.farey.in_h_u(nodes[m].u(), f));
            let Some(m) = next else {
                horizon_exhausted = true;
                break;
            };
            let v = nodes[m - 1].u();
            let w = nodes[m].u();
            links.push(AdmissibleLink {
                u_index: cur,
                v_index: m - 1,
                w_index: m,
                v_in_d: in_d(node, v, f),
                w_in_e: v.deg() < w.deg() && in_e(node, v, w, eps, f),
                w_in_q_eps: in_q[m],
            });
            cur = m;
        }
    }
    Ok(AdmissibleReport {
        eps: fmt_rational(eps),
        entries: nodes.len(),
        in_q_eps: in_q,
        start,
        links,
        horizon_exhausted,
        rational: seq.rational_terminated,
        independence_note: format!("no K-linear relation is certified; horizon deg b <= {}", seq.degree_bound),
    })
}

/// `s` rounded up to the grid `2^{-bits}`.
pub fn round_up_dyadic(x: f64, bits: u32) -> BigRational {
    let scale = (1u64 << bits) as f64;
    rat((x * scale).ceil() as i64, 1i64 << bits)
}

/// `ε` as an exact rational is zero-free by construction; helper for reports.
pub fn is_positive(r: &BigRational) -> bool {
    *r > BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root(d: usize) -> ApproxPair {
        ApproxPair::root(d)
    }

    #[test]
    fn d_shell_zero_at_root() {
        let f = Field::of_order(2).unwrap();
        let node = UpperNode::new(&root(2), &f);
        let shells = enumerate_d(&node, 0, &f).unwrap();
        let a = vec![Poly::zero(), Poly::zero()];
        let b = vec![Poly::one(), Poly::zero()];
        assert_eq!(shells[0].members, vec![
            ApproxPair { a, b: Poly::one() },
            ApproxPair { a: b, b: Poly::one() }
        ]);
        assert!(shells[0].within_bound());
    }

    #[test]
    fn d_sum_below_closed_form() {
        let f = Field::of_order(2).unwrap();
        let node = UpperNode::new(&root(2), &f);
        let cs = child_sum_d(&node, QExp::from_integer(3), 3, &f).unwrap();
        assert!(cs.shells_within_bounds && cs.holds);
        assert_eq!(cs.closed_form, Enclosure::exact(rat(4, 1)));
    }

    #[test]
    fn e_radius_is_strict() {
        // q = 2, d = 2, ε = 1, v = root, k = 2: q^{2e - 2} < 1 ⇔ e <= 0
        assert_eq!(e_radius_exp(0, 2, 2, &rat(1, 1), 2), 0);
        assert_eq!(e_radius_exp(0, 2, 1, &rat(1, 1), 2), 0);
        assert_eq!(e_radius_exp(0, 2, 3, &rat(1, 1), 2), 1);
    }

    #[test]
    fn e_sum_below_closed_form() {
        let f = Field::of_order(2).unwrap();
        let node = UpperNode::new(&root(2), &f);
        let cs = child_sum_e(&node, &root(2), &rat(1, 1), QExp::from_integer(3), 2, &f).unwrap();
        assert!(cs.shells_within_bounds && cs.holds);
        for s in &cs.shells {
            for w in &s.members {
                assert!(UpperNode::new(w, &f).in_q_eps(&rat(1, 1), 2));
            }
        }
    }
}
