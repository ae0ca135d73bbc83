//! The strictly nested structure `(Q_{ε,N}, σ_{ε,N}, B)` behind the lower bound.
//!
//! For `u ∈ Q` with reduced basis `ξ_1, …, ξ_d` of `Λ_u` (minima `λ_1 <= … <= λ_d`), a
//! lattice vector `α = Σ_{i<d} m_i ξ_i + n ξ_d` defines
//! `Λ_α = Rξ_1 + … + Rξ_{d−1} + R Σ (m_i/n) ξ_i` and `λ̂_1(α) = (|u| ‖α‖)^{1/(d−1)} λ_1(Λ_α)`.
//! The children of `u` are the `v` with `π_u(v) = α` for primitive `α` in the box
//! `|m_i| < |n| λ_d/λ_i`, `0 < |n| <= q^N`, with `λ̂_1(α) > ε`, and `|v|` in the window
//! `(|u∧v|/ε)^{d/(d−1)} <= |v| <= (q|u∧v|/ε)^{d/(d−1)}`. Balls are
//! `B(u) = B(û, λ_1(u)/(q|u|))`.
//!
//! Every comparison with `ε` is made after raising both sides to an integer power, so
//! all decisions are exact for rational `ε`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diophantine::{
    approx_quality_exact, best_approx_sequence_exact, di_test, farey_lattice, fiber, hat_distance, pi_u, wedge_exp,
    ApproxPair, DiReport, FareyLattice,
};
use crate::error::{Error, Result};
use crate::ffpoly::arith::{divisor_sum_d1_from, euler_phi_from};
use crate::ffpoly::factor::factor;
use crate::ffpoly::{gcd_all, Fe, Field, Poly};
use crate::lattice::ReducedLattice;
use crate::laurent::{ball_distance, lvec_from_ratfns, Ball, LVec, RatFn};
use crate::qexp::{cmp_qpow, floor_log, fmt_rational, parse_rational, qpow_rat, rat, rat_pow, Enclosure, QExp, QPowCache};

/// A node `u` of the structure with its reduced Farey lattice.
#[derive(Clone, Debug)]
pub struct LowerNode {
    pub farey: FareyLattice,
}

impl LowerNode {
    pub fn new(u: &ApproxPair, f: &Field) -> Self {
        LowerNode { farey: farey_lattice(u, f) }
    }
    pub fn root(d: usize, f: &Field) -> Self {
        Self::new(&ApproxPair::root(d), f)
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
    pub fn minima(&self) -> Vec<i64> {
        self.farey.minima_exps()
    }
    pub fn l1(&self) -> i64 {
        self.farey.lambda_exp(0)
    }
    pub fn ld(&self) -> i64 {
        self.farey.lambda_exp(self.d() - 1)
    }
    /// `log_q` of the radius `λ_1(u)/(q|u|)` of `B(u)`.
    pub fn ball_radius_exp(&self) -> i64 {
        self.l1() - 1 - self.deg()
    }
    pub fn lambda_hat1_exp(&self) -> QExp {
        self.farey.lambda_hat1_exp()
    }
    /// `ε/q <= λ̂_1(u) <= ε`.
    pub fn in_lambda_window(&self, eps: &BigRational, q: u32) -> bool {
        let e = self.lambda_hat1_exp();
        cmp_qpow(q, e, eps) != Ordering::Greater && cmp_qpow(q, e + 1, eps) != Ordering::Less
    }
    /// `B(u)` with its centre expanded down to exponent `low`.
    pub fn ball(&self, low: i64, f: &Field) -> Ball {
        Ball::new(lvec_from_ratfns(&self.u().hat(f), low, f), self.ball_radius_exp())
    }
}

/// `α = Σ_{i<d} m_i ξ_i + n ξ_d` in the reduced basis of `Λ_u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub m: Vec<Poly>,
    pub n: Poly,
}

impl AlphaVector {
    pub fn is_primitive(&self, f: &Field) -> bool {
        gcd_all(self.m.iter().chain([&self.n]), f).is_one()
    }
    pub fn coords(&self) -> Vec<Poly> {
        self.m.iter().cloned().chain([self.n.clone()]).collect()
    }
    pub fn vector(&self, node: &LowerNode, f: &Field) -> Vec<RatFn> {
        node.farey.lattice.combine(&self.coords(), f)
    }
    /// `log_q ‖α‖ = max(deg m_i + log λ_i, deg n + log λ_d)` by orthogonality.
    pub fn norm_exp(&self, node: &LowerNode) -> i64 {
        let l = node.minima();
        self.m
            .iter()
            .zip(&l)
            .map(|(m, li)| if m.is_zero() { i64::MIN } else { m.deg() + li })
            .chain([self.n.deg() + l[l.len() - 1]])
            .max()
            .unwrap()
    }
    /// `‖α‖ = |n| λ_d(u)`.
    pub fn is_dominant(&self, node: &LowerNode) -> bool {
        self.norm_exp(node) == self.n.deg() + node.ld()
    }
    /// The strict box `|m_i| < |n| λ_d/λ_i`.
    pub fn in_box(&self, node: &LowerNode) -> bool {
        let l = node.minima();
        let ld = l[l.len() - 1];
        !self.n.is_zero() && self.m.iter().zip(&l).all(|(m, li)| m.deg() < self.n.deg() + ld - li)
    }
    pub fn scale(&self, c: Fe, f: &Field) -> AlphaVector {
        AlphaVector { m: self.m.iter().map(|p| p.scale(c, f)).collect(), n: self.n.scale(c, f) }
    }
}

fn check_dims(node: &LowerNode) -> Result<()> {
    if node.d() < 2 {
        return Err(Error::Dimension("the lower structure needs d >= 2".into()));
    }
    Ok(())
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if !(eps.is_positive_rat() && *eps < BigRational::one()) {
        return Err(Error::OutOfRange(format!("ε = {} must lie in (0, 1)", fmt_rational(eps))));
    }
    Ok(())
}

trait PositiveRat {
    fn is_positive_rat(&self) -> bool;
}
impl PositiveRat for BigRational {
    fn is_positive_rat(&self) -> bool {
        *self > BigRational::zero()
    }
}

/// `L(m, n) = R nξ_1 + … + R nξ_{d−1} + R Σ m_i ξ_i`, scaled by `1/scale`.
fn l_lattice(node: &LowerNode, m: &[Poly], n: &Poly, scale: &Poly, f: &Field) -> ReducedLattice {
    let lat = &node.farey.lattice;
    let d = node.d();
    let mut cols: Vec<Vec<Poly>> = (0..d - 1)
        .map(|i| lat.cols[i].iter().map(|p| p.mul(n, f)).collect())
        .collect();
    let mut extra = vec![Poly::zero(); d];
    for (mi, col) in m.iter().zip(&lat.cols) {
        for (acc, p) in extra.iter_mut().zip(col) {
            *acc = acc.add(&mi.mul(p, f), f);
        }
    }
    cols.push(extra);
    ReducedLattice::from_poly_generators(lat.denom.mul(scale, f), cols, f).expect("nonzero denominator")
}

/// `Λ_α`, reduced; a rank `d − 1` lattice inside `H'_u`.
pub fn lambda_alpha(node: &LowerNode, alpha: &AlphaVector, f: &Field) -> Result<ReducedLattice> {
    check_dims(node)?;
    if alpha.n.is_zero() {
        return Err(Error::OutOfRange("α must have a nonzero ξ_d coefficient".into()));
    }
    Ok(l_lattice(node, &alpha.m, &alpha.n, &alpha.n, f))
}

/// `log_q λ̂_1(α) = (log|u| + log‖α‖)/(d − 1) + log λ_1(Λ_α)`.
pub fn lambda1_hat_alpha_exp(node: &LowerNode, alpha: &AlphaVector, f: &Field) -> Result<QExp> {
    let lat = lambda_alpha(node, alpha, f)?;
    let d = node.d() as i64;
    Ok(QExp::new(node.deg() + alpha.norm_exp(node), d - 1) + lat.lambda1_exp())
}

/// `log_q` of `det(Λ_α)·|n|`, which equals `log_q Π_{i<d} λ_i(u)` for primitive `α`.
pub fn lambda_alpha_covolume_times_n(node: &LowerNode, alpha: &AlphaVector, f: &Field) -> Result<i64> {
    Ok(lambda_alpha(node, alpha, f)?.covolume_exp() + alpha.n.deg())
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// `(⌊log_q ε^p⌋, ⌈log_q ε^p⌉)`.
fn eps_logs(eps: &BigRational, p: i64, q: u32) -> (i64, i64) {
    let e = rat_pow(eps, p);
    let lo = floor_log(q, &e);
    let hi = if qpow_rat(q, lo) == e { lo } else { lo + 1 };
    (lo, hi)
}

/// Shell offsets `k` (with `|v| = q^k |u|`) allowed by the window for `log_q |u∧v| = a`.
pub fn zeta_window(node: &LowerNode, a: i64, eps: &BigRational, q: u32) -> std::ops::RangeInclusive<i64> {
    let d = node.d() as i64;
    let (lf, lc) = eps_logs(eps, d, q);
    // a d − L <= (k + deg u)(d − 1) <= (a + 1) d − C
    let lo = ceil_div(a * d - lf, d - 1) - node.deg();
    let hi = ((a + 1) * d - lc).div_euclid(d - 1) - node.deg();
    lo.max(0)..=hi
}

/// The window condition checked directly from `|u∧v|` and `|v|`.
pub fn zeta_holds(u: &ApproxPair, v: &ApproxPair, eps: &BigRational, f: &Field) -> bool {
    let d = u.d() as i64;
    let Some(w) = wedge_exp(u, v, f) else { return false };
    let eps_d = rat_pow(eps, d);
    // q^{wd} <= ε^d |v|^{d−1} <= q^{(w+1)d}
    let dv = v.deg() * (d - 1);
    cmp_qpow(f.q(), QExp::from_integer(w * d - dv), &eps_d) != Ordering::Greater
        && cmp_qpow(f.q(), QExp::from_integer((w + 1) * d - dv), &eps_d) != Ordering::Less
}

/// The integer range `T_0 <= k <= T_N` used by the child sets and the `F_N` sums, decided exactly.
#[derive(Clone, Debug, Serialize)]
pub struct TWindow {
    pub t0: i64,
    pub t_n: i64,
    /// `T_0` as a real number; the integer bound is its ceiling.
    pub t0_real: f64,
    pub t0_integral: bool,
}

pub fn t_window(node: &LowerNode, eps: &BigRational, n_max: u32, f: &Field) -> TWindow {
    let q = f.q();
    let d = node.d() as i64;
    let (lf, lc) = eps_logs(eps, d, q);
    let base = node.deg() + d * node.ld();
    let t0 = ceil_div(base + d - lf, d - 1);
    let t_n = (base + d * (n_max as i64 + 1) - lc).div_euclid(d - 1);
    let lam_hat_d = node.deg() as f64 / d as f64 + node.ld() as f64;
    let eps_f = crate::qexp::to_f64(eps);
    let t0_real = d as f64 / (d - 1) as f64 * (1.0 + lam_hat_d - eps_f.log(q as f64));
    // T_0 is an integer exactly when ε^d q^{T_0(d−1)−d} = λ̂_d^d
    let t0_integral = rat_pow(eps, d) * qpow_rat(q, t0 * (d - 1) - d) == qpow_rat(q, base);
    TWindow { t0, t_n, t0_real, t0_integral }
}

/// A child `v ∈ F_N(u, ε)` with the data that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Child {
    /// `π_u(v)` in the reduced basis of `Λ_u` (unit multiple included).
    pub alpha: AlphaVector,
    /// `|v| = q^k |u|`.
    pub k: i64,
    /// Canonical (monic `b`) representative.
    pub v: ApproxPair,
}

fn coefficient_boxes(windows: Vec<i64>, q: u32) -> impl Iterator<Item = Vec<Poly>> {
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

/// Visits the primitive `α` (monic `n`) of the box with `λ̂_1(α) > ε` and `deg n` in range.
fn visit_alphas(
    node: &LowerNode,
    eps: &BigRational,
    n_degrees: std::ops::RangeInclusive<i64>,
    f: &Field,
    visit: &mut dyn FnMut(&AlphaVector) -> Result<ControlFlow<()>>,
) -> Result<ControlFlow<()>> {
    let q = f.q();
    let d = node.d() as i64;
    let l = node.minima();
    let ld = l[l.len() - 1];
    let eps_dm1 = rat_pow(eps, d - 1);
    for nd in n_degrees {
        if nd < 0 {
            continue;
        }
        for n in Poly::monic_of_degree(nd as usize, q) {
            let windows: Vec<i64> = l[..l.len() - 1].iter().map(|li| nd + ld - li - 1).collect();
            for m in coefficient_boxes(windows, q) {
                let alpha = AlphaVector { m, n: n.clone() };
                if !alpha.is_primitive(f) {
                    continue;
                }
                // λ̂_1(α)^{d−1} > ε^{d−1}
                let e = lambda1_hat_alpha_exp(node, &alpha, f)? * (d - 1);
                if cmp_qpow(q, e, &eps_dm1) != Ordering::Greater {
                    continue;
                }
                if visit(&alpha)?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Visits `F_N(u, ε)` in the order (n, m, unit, k, fiber element).
fn visit_children(
    node: &LowerNode,
    eps: &BigRational,
    n_max: u32,
    f: &Field,
    visit: &mut dyn FnMut(Child) -> ControlFlow<()>,
) -> Result<()> {
    check_dims(node)?;
    check_eps(eps)?;
    let u = node.u().clone();
    let _ = visit_alphas(node, eps, 0..=n_max as i64, f, &mut |alpha| {
        let a = node.deg() + alpha.norm_exp(node);
        for c in f.units() {
            let ca = alpha.scale(c, f);
            let vec = ca.vector(node, f);
            for k in zeta_window(node, a, eps, f.q()) {
                for v in fiber(&u, &vec, k as u32, true, f)? {
                    if visit(Child { alpha: ca.clone(), k, v }).is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(())
}

/// All of `F_N(u, ε)`, one canonical representative per `F_q^*`-orbit.
pub fn enumerate_children(node: &LowerNode, eps: &BigRational, n_max: u32, f: &Field) -> Result<Vec<Child>> {
    let mut out = Vec::new();
    visit_children(node, eps, n_max, f, &mut |c| {
        out.push(c);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// The first child in enumeration order, without enumerating the rest.
pub fn first_child(node: &LowerNode, eps: &BigRational, n_max: u32, f: &Field) -> Result<Option<Child>> {
    let mut out = None;
    visit_children(node, eps, n_max, f, &mut |c| {
        out = Some(c);
        ControlFlow::Break(())
    })?;
    Ok(out)
}

/// Exact re-verification of one parent–child edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildChecks {
    /// `π_u(v) = α` with `α` primitive, in the box, `‖α‖ = |n| λ_d(u)`.
    pub alpha_valid: bool,
    pub lambda_hat_alpha_above_eps: bool,
    pub zeta_window: bool,
    /// `ε/q <= λ̂_1(v) <= ε`.
    pub lambda_hat_window: bool,
    /// `λ_1(v) = |u∧v|/|v|`.
    pub lambda1_identity: bool,
    pub grows: bool,
    /// `‖α‖ >= λ_d(u) >= λ_d(v)/q²`.
    pub alpha_length: bool,
    /// `π_v(u)` is primitive in `Λ_v`.
    pub beta_primitive: bool,
    pub nesting: NestingCheck,
}

impl ChildChecks {
    pub fn all(&self) -> bool {
        self.alpha_valid
            && self.lambda_hat_alpha_above_eps
            && self.zeta_window
            && self.lambda_hat_window
            && self.lambda1_identity
            && self.grows
            && self.alpha_length
            && self.beta_primitive
            && self.nesting.holds()
    }
}

/// Recomputes every condition on the edge `u → v` from `u`, `v` and `ε` alone.
pub fn check_child(parent: &LowerNode, v: &ApproxPair, eps: &BigRational, f: &Field) -> Result<ChildChecks> {
    check_dims(parent)?;
    let q = f.q();
    let d = parent.d() as i64;
    let u = parent.u();
    let child = LowerNode::new(v, f);
    let alpha_vec = pi_u(u, v, f);
    let coords = parent.farey.lattice_coords(&alpha_vec, f)?;
    let alpha = AlphaVector { m: coords[..coords.len() - 1].to_vec(), n: coords[coords.len() - 1].clone() };
    let alpha_valid = !alpha.n.is_zero() && alpha.is_primitive(f) && alpha.in_box(parent) && alpha.is_dominant(parent);
    let lambda_hat_alpha_above_eps = !alpha.n.is_zero()
        && cmp_qpow(q, lambda1_hat_alpha_exp(parent, &alpha, f)? * (d - 1), &rat_pow(eps, d - 1)) == Ordering::Greater;
    let lambda1_identity = wedge_exp(u, v, f).is_some_and(|w| child.l1() == w - v.deg());
    let beta = pi_u(v, u, f);
    let beta_primitive = child
        .farey
        .lattice_coords(&beta, f)
        .is_ok_and(|c| gcd_all(c.iter(), f).is_one());
    let an = if alpha.n.is_zero() { i64::MIN } else { alpha.norm_exp(parent) };
    Ok(ChildChecks {
        alpha_valid,
        lambda_hat_alpha_above_eps,
        zeta_window: zeta_holds(u, v, eps, f),
        lambda_hat_window: child.in_lambda_window(eps, q),
        lambda1_identity,
        grows: v.deg() > u.deg(),
        alpha_length: an >= parent.ld() && parent.ld() >= child.ld() - 2,
        beta_primitive,
        nesting: verify_nesting(parent, &child, f),
    })
}

/// Containment `B(v̂, λ_1(v)/|v|) ⊆ B(u)` and `diam B(v) < diam B(u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingCheck {
    pub contained: bool,
    pub strictly_smaller: bool,
}

impl NestingCheck {
    pub fn holds(&self) -> bool {
        self.contained && self.strictly_smaller
    }
}

/// Ultrametric containment of `B(centre(v), q^radius)` in `B(u)`, decided exactly.
pub fn ball_inside(parent: &LowerNode, center: &ApproxPair, radius: i64, f: &Field) -> bool {
    let r = parent.ball_radius_exp();
    radius <= r && hat_distance(parent.u(), center, f) <= crate::qexp::QNorm::pow(r)
}

pub fn verify_nesting(parent: &LowerNode, child: &LowerNode, f: &Field) -> NestingCheck {
    NestingCheck {
        contained: ball_inside(parent, child.u(), child.l1() - child.deg(), f),
        strictly_smaller: child.ball_radius_exp() < parent.ball_radius_exp(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub children: usize,
    pub pairs: u64,
    /// `log_q` of the smallest distance between distinct child balls.
    pub min_distance_exp: Option<i64>,
    /// Every pair of balls is disjoint and their distance is `‖v̂ − ŵ‖`.
    pub distances_are_center_distances: bool,
    /// `log_q` of the lower bound, when it is a power of `q` (else its floor).
    pub bound_exp_floor: i64,
    pub bound_holds: bool,
}

/// Pairwise distances between the balls of the children against
/// `(ε/(q^{N+1} λ̂_d(u)))^{2d/(d−1)} λ_1(u)/|u|`.
pub fn verify_separation(
    node: &LowerNode,
    children: &[ApproxPair],
    eps: &BigRational,
    n_max: u32,
    f: &Field,
) -> Result<SeparationReport> {
    check_dims(node)?;
    let q = f.q();
    let d = node.d() as i64;
    let maxdeg = children.iter().map(ApproxPair::deg).max().unwrap_or(0);
    let low = -(2 * maxdeg + 4);
    let nodes: Vec<LowerNode> = children.iter().map(|v| LowerNode::new(v, f)).collect();
    let balls: Vec<Ball> = nodes.iter().map(|n| n.ball(low, f)).collect();
    let mut min_exp: Option<i64> = None;
    let mut consistent = true;
    let mut pairs = 0u64;
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            pairs += 1;
            let bd = ball_distance(&balls[i], &balls[j], f)?;
            let cd = hat_distance(&children[i], &children[j], f);
            if bd != cd || bd.is_zero() {
                consistent = false;
            }
            if let Some(e) = bd.exp() {
                min_exp = Some(min_exp.map_or(e, |m| m.min(e)));
            }
        }
    }
    // dist^{d−1} q^{2d(N+1)} λ̂_d^{2d} (|u|/λ_1)^{d−1} >= ε^{2d}
    let fixed = 2 * d * (n_max as i64 + 1) + 2 * node.deg() + 2 * d * node.ld() - (node.l1() - node.deg()) * (d - 1);
    let eps_2d = rat_pow(eps, 2 * d);
    let bound_holds = match min_exp {
        None => true,
        Some(dm) => cmp_qpow(q, QExp::from_integer(dm * (d - 1) + fixed), &eps_2d) != Ordering::Less,
    };
    // log_q bound = (log ε^{2d} − fixed)/(d − 1)
    let bound_exp_floor = (floor_log(q, &eps_2d) - fixed).div_euclid(d - 1);
    Ok(SeparationReport {
        children: children.len(),
        pairs,
        min_distance_exp: min_exp,
        distances_are_center_distances: consistent,
        bound_exp_floor,
        bound_holds,
    })
}

/// `#X_n` and its lower bound `φ(n)(|n|^{d−2} − ε^{d−1} D_1(n) |n|^{d−3})`.
#[derive(Clone, Debug, Serialize)]
pub struct XnCount {
    pub n: Poly,
    pub count: u128,
    #[serde(with = "crate::qexp::serde_rational")]
    pub bound: BigRational,
    pub holds: bool,
}

/// `λ_1(L(m, n)) > η` with `η = ε|n| (|u||n|λ_d(u))^{−1/(d−1)}`, decided exactly.
fn l_above_eta(node: &LowerNode, m: &[Poly], n: &Poly, eps_dm1: &BigRational, f: &Field) -> bool {
    let d = node.d() as i64;
    let e = l_lattice(node, m, n, &Poly::one(), f).lambda1_exp();
    let x = e * (d - 1) - (d - 1) * n.deg() + node.deg() + n.deg() + node.ld();
    cmp_qpow(f.q(), QExp::from_integer(x), eps_dm1) == Ordering::Greater
}

pub fn count_xn(node: &LowerNode, n: &Poly, eps: &BigRational, f: &Field) -> Result<XnCount> {
    check_dims(node)?;
    if n.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let q = f.q();
    let d = node.d() as i64;
    let eps_dm1 = rat_pow(eps, d - 1);
    let windows = vec![n.deg() - 1; (d - 1) as usize];
    let mut count = 0u128;
    for m in coefficient_boxes(windows, q) {
        if !gcd_all(m.iter().chain([n]), f).is_one() {
            continue;
        }
        if l_above_eta(node, &m, n, &eps_dm1, f) {
            count += 1;
        }
    }
    let fact = factor(n, f)?;
    let phi = euler_phi_from(&fact, f)?;
    let d1 = divisor_sum_d1_from(&fact, f)?;
    let nn = n.deg();
    let bound = BigRational::from_integer(phi.into())
        * (qpow_rat(q, nn * (d - 2)) - &eps_dm1 * BigRational::from_integer(d1.into()) * qpow_rat(q, nn * (d - 3)));
    let holds = BigRational::from_integer(count.into()) >= bound;
    Ok(XnCount { n: n.clone(), count, bound, holds })
}

/// `Σ_{deg n = ℓ} #X_n` over all (not only monic) `n`, against `q^{ℓd}(q−1)((q−1)/q − ε^{d−1})`.
#[derive(Clone, Debug, Serialize)]
pub struct XnDegreeSum {
    pub degree: u32,
    pub sum: u128,
    #[serde(with = "crate::qexp::serde_rational")]
    pub bound: BigRational,
    pub holds: bool,
    /// Every individual `#X_n` met its own bound.
    pub each_holds: bool,
    /// The monic `n` whose `#X_n` fell below its bound.
    pub failures: Vec<XnCount>,
}

pub fn xn_degree_sum(node: &LowerNode, degree: u32, eps: &BigRational, f: &Field) -> Result<XnDegreeSum> {
    let q = f.q();
    let d = node.d() as i64;
    let mut sum = 0u128;
    let mut failures = Vec::new();
    for n in Poly::monic_of_degree(degree as usize, q) {
        let c = count_xn(node, &n, eps, f)?;
        // #X_{cn} = #X_n for units c
        sum += c.count * (q as u128 - 1);
        if !c.holds {
            failures.push(c);
        }
    }
    let each_holds = failures.is_empty();
    let bound = qpow_rat(q, degree as i64 * d) * rat(q as i64 - 1, 1) * (rat(q as i64 - 1, q as i64) - rat_pow(eps, d - 1));
    let holds = BigRational::from_integer(sum.into()) >= bound;
    Ok(XnDegreeSum { degree, sum, bound, holds, each_holds, failures })
}

/// `#{α ∈ Λ_u(ε) ∩ C_N(u) : εq^{k(d−1)/d−1}|u|^{−1/d} <= ‖α‖ <= εq^{k(d−1)/d}|u|^{−1/d}}`
/// (all units) against `((q−1)/q − ε^{d−1}) ε^d (q−1)/q^d q^{(d−1)k}`, asserted for `k >= T_0`.
#[derive(Clone, Debug, Serialize)]
pub struct ShellAlphaCount {
    pub k: i64,
    pub t0: i64,
    pub count: u128,
    #[serde(with = "crate::qexp::serde_rational")]
    pub bound: BigRational,
    /// `None` below `T_0`, where no bound is claimed.
    pub holds: Option<bool>,
}

pub fn shell_alpha_count(node: &LowerNode, eps: &BigRational, k: i64, f: &Field) -> Result<ShellAlphaCount> {
    check_dims(node)?;
    check_eps(eps)?;
    let q = f.q();
    let d = node.d() as i64;
    let (lf, lc) = eps_logs(eps, d, q);
    // ‖α‖ = q^e: C <= e d − k(d−1) + d + deg u and e d − k(d−1) + deg u <= L
    let e_lo = ceil_div(lc + k * (d - 1) - d - node.deg(), d);
    let e_hi = (lf + k * (d - 1) - node.deg()).div_euclid(d);
    let ld = node.ld();
    let mut count = 0u128;
    let _ = visit_alphas(node, eps, (e_lo - ld)..=(e_hi - ld), f, &mut |_| {
        count += q as u128 - 1;
        Ok(ControlFlow::Continue(()))
    })?;
    let bound = (rat(q as i64 - 1, q as i64) - rat_pow(eps, d - 1))
        * rat_pow(eps, d)
        * rat(q as i64 - 1, 1)
        * qpow_rat(q, (d - 1) * k - d);
    let t0 = t_window(node, eps, 0, f).t0;
    let holds = (k >= t0).then(|| BigRational::from_integer(count.into()) >= bound);
    Ok(ShellAlphaCount { k, t0, count, bound, holds })
}

/// Both sides of the `F_N`-sum inequality.
#[derive(Clone, Debug, Serialize)]
pub struct FnSumReport {
    pub s: String,
    pub eps: String,
    pub n_max: u32,
    pub window: TWindow,
    pub children: usize,
    /// Canonical children per shell `k`.
    pub shells: BTreeMap<i64, usize>,
    /// `Σ_{v ∈ F_N(u,ε)} (λ_1(v)/|v|)^s (|u|/λ_1(u))^s`, all orbit members.
    pub lhs: Enclosure,
    pub rhs: Enclosure,
    pub holds: bool,
}

pub fn f_n_sum_check(node: &LowerNode, eps: &BigRational, n_max: u32, s: &BigRational, f: &Field) -> Result<FnSumReport> {
    check_dims(node)?;
    check_eps(eps)?;
    let q = f.q();
    let di = node.d() as i64;
    let s_exp = QExp::new(
        s.numer().try_into().map_err(|_| Error::TooLarge("s numerator".into()))?,
        s.denom().try_into().map_err(|_| Error::TooLarge("s denominator".into()))?,
    );
    if s_exp <= QExp::zero() {
        return Err(Error::OutOfRange("s must be positive".into()));
    }
    let children = enumerate_children(node, eps, n_max, f)?;
    let mut shells: BTreeMap<i64, usize> = BTreeMap::new();
    // exponent of λ_1(v)/|v| · |u|/λ_1(u) → multiplicity
    let mut by_exp: BTreeMap<i64, u128> = BTreeMap::new();
    for c in &children {
        *shells.entry(c.k).or_default() += 1;
        let l1v = farey_lattice(&c.v, f).r_exp();
        *by_exp.entry(l1v - c.v.deg() - node.l1() + node.deg()).or_default() += q as u128 - 1;
    }
    let mut cache = QPowCache::new();
    let lhs = by_exp.iter().fold(Enclosure::zero(), |acc, (&e, &m)| {
        acc.add(&cache.get(q, s_exp * e).scale(&BigRational::from_integer(m.into())))
    });
    let window = t_window(node, eps, n_max, f);
    let ratio = -(s_exp * QExp::new(di + 1, di) - di);
    let mut series = Enclosure::zero();
    for k in window.t0..=window.t_n {
        series = series.add(&cache.get(q, ratio * k));
    }
    let c = (rat(q as i64 - 1, q as i64) - rat_pow(eps, di - 1)) * rat_pow(eps, di) * rat((q as i64 - 1).pow(2), 1)
        / qpow_rat(q, di);
    let rhs = series.mul_nonneg(&cache.get(q, -s_exp)).scale(&c);
    let holds = lhs.lo >= rhs.hi;
    Ok(FnSumReport {
        s: fmt_rational(s),
        eps: fmt_rational(eps),
        n_max,
        window,
        children: children.len(),
        shells,
        lhs,
        rhs,
        holds,
    })
}

/// How the next node of a certificate chain is picked among the children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chooser {
    LexicographicFirst,
    /// The child whose nearest sibling is farthest (ties: enumeration order).
    MaxSeparation,
}

fn choose(node: &LowerNode, eps: &BigRational, n_max: u32, chooser: Chooser, f: &Field) -> Result<Option<Child>> {
    match chooser {
        Chooser::LexicographicFirst => first_child(node, eps, n_max, f),
        Chooser::MaxSeparation => {
            let kids = enumerate_children(node, eps, n_max, f)?;
            let mut best: Option<(i64, usize)> = None;
            for (i, c) in kids.iter().enumerate() {
                let nearest = kids
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .filter_map(|(_, o)| hat_distance(&c.v, &o.v, f).exp())
                    .min()
                    .unwrap_or(i64::MAX);
                if best.is_none_or(|(b, _)| nearest > b) {
                    best = Some((nearest, i));
                }
            }
            Ok(best.map(|(_, i)| kids[i].clone()))
        }
    }
}

/// One level of the schedule `(ε_i, N_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleLevel {
    pub level: i64,
    /// The analytic value (singular schedule only), to 12 decimals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_analytic: Option<String>,
    /// The exact value used.
    pub eps: String,
    pub n_max: u32,
}

/// `ε_i = 1/ln(i+1)` snapped down to a power of `q`, and `N_i = i + 1`.
pub fn sing_schedule(i: i64, q: u32) -> Result<ScheduleLevel> {
    let ln = ((i + 1) as f64).ln();
    if i < 0 || ln <= 1.0 {
        return Err(Error::OutOfRange(format!("schedule level {i} gives ε_i >= 1 (need ln(i+1) > 1)")));
    }
    let x = 1.0 / ln;
    let mut k = (-x.log(q as f64)).ceil() as i64;
    // largest q^{-k} <= x, corrected against rounding at exact powers
    while (q as f64).powi(-(k as i32 - 1)) <= x {
        k -= 1;
    }
    while (q as f64).powi(-(k as i32)) > x {
        k += 1;
    }
    Ok(ScheduleLevel {
        level: i,
        eps_analytic: Some(format!("{x:.12}")),
        eps: fmt_rational(&qpow_rat(q, -k)),
        n_max: (i + 1) as u32,
    })
}

/// One link `u_j → u_{j+1}` of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertLink {
    pub index: usize,
    pub schedule: ScheduleLevel,
    pub alpha: AlphaVector,
    pub k: i64,
    pub v: ApproxPair,
    /// `log_q λ_i(Λ_v)`.
    pub minima: Vec<i64>,
    pub lambda_hat1: String,
    pub checks: ChildChecks,
}

/// `A(θ, u_j)^d |u_{j+1}| <= ε_j^d` for consecutive nodes of the chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletLink {
    pub deg_u: i64,
    pub deg_next: i64,
    /// `log_q A(θ, u_j)`.
    pub quality_exp: i64,
    pub eps: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiCertificate {
    pub kind: String,
    pub q: u32,
    pub d: usize,
    pub chooser: Chooser,
    pub root: ApproxPair,
    pub links: Vec<CertLink>,
    /// `θ = û` of the last node.
    pub theta: Vec<RatFn>,
    /// Digits of `θ` down to the radius of the last ball: every point of that ball shares them.
    pub theta_prefix: LVec,
    /// Degrees of the best approximations of `θ` up to `deg u_last`.
    pub best_approx_degrees: Vec<i64>,
    /// Every chain node is a best approximation of `θ`.
    pub chain_in_best_approx: bool,
    /// `A(θ, u_j) < λ_1(u_j)` for every node.
    pub quality_below_lambda1: bool,
    pub dirichlet: Vec<DirichletLink>,
    /// The strict test `|u_n|^{1/d} r(u_n) < ε` on the best-approximation prefix, at the last `ε`.
    pub di_report: DiReport,
    /// `|u_n|^{1/d} r(u_n) <= ε` for every best approximation after the root.
    pub di_non_strict_below_root: bool,
    pub caveats: Vec<String>,
    pub checksum: String,
}

impl DiCertificate {
    /// Every recorded check passed.
    pub fn passes(&self) -> bool {
        self.links.iter().all(|l| l.checks.all())
            && self.chain_in_best_approx
            && self.quality_below_lambda1
            && self.dirichlet.iter().all(|l| l.holds)
            && self.di_non_strict_below_root
    }

    fn body_json(&self) -> String {
        let mut c = self.clone();
        c.checksum = String::new();
        serde_json::to_string(&c).expect("certificate serialises")
    }

    pub fn compute_checksum(&self) -> String {
        format!("{:x}", Sha256::digest(self.body_json().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

fn build_chain(
    kind: &str,
    schedule: &[ScheduleLevel],
    root: &ApproxPair,
    chooser: Chooser,
    f: &Field,
) -> Result<DiCertificate> {
    let q = f.q();
    let d = root.d();
    if d < 2 {
        return Err(Error::Dimension("the lower structure needs d >= 2".into()));
    }
    let mut node = LowerNode::new(root, f);
    let mut nodes = vec![node.clone()];
    let mut links = Vec::with_capacity(schedule.len());
    for (index, level) in schedule.iter().enumerate() {
        let eps = parse_rational(&level.eps)?;
        let child = choose(&node, &eps, level.n_max, chooser, f)?.ok_or_else(|| {
            Error::OutOfRange(format!(
                "no children at step {index} for ε = {}, N = {} (need (q−1)/q > ε^(d−1))",
                level.eps, level.n_max
            ))
        })?;
        let checks = check_child(&node, &child.v, &eps, f)?;
        let next = LowerNode::new(&child.v, f);
        links.push(CertLink {
            index,
            schedule: level.clone(),
            alpha: child.alpha,
            k: child.k,
            v: child.v,
            minima: next.minima(),
            lambda_hat1: next.lambda_hat1_exp().to_string(),
            checks,
        });
        nodes.push(next.clone());
        node = next;
    }
    let last = nodes.last().unwrap();
    let theta = last.u().hat(f);
    let theta_prefix = lvec_from_ratfns(&theta, last.ball_radius_exp(), f);
    let seq = best_approx_sequence_exact(&theta, last.deg(), f)?;
    let best: Vec<ApproxPair> = seq.pairs().map(|p| p.canonical(f)).collect();
    let chain_in_best_approx = nodes.iter().all(|n| best.contains(n.u()));
    let quality_below_lambda1 = nodes
        .iter()
        .all(|n| approx_quality_exact(&theta, n.u(), f) < crate::qexp::QNorm::pow(n.l1()));
    let dirichlet = nodes
        .windows(2)
        .zip(schedule)
        .map(|(w, level)| {
            let a = approx_quality_exact(&theta, w[0].u(), f);
            let eps = parse_rational(&level.eps)?;
            let holds = match a.exp() {
                None => true,
                Some(e) => {
                    cmp_qpow(q, QExp::from_integer(d as i64 * e + w[1].deg()), &rat_pow(&eps, d as i64))
                        != Ordering::Greater
                }
            };
            Ok(DirichletLink {
                deg_u: w[0].deg(),
                deg_next: w[1].deg(),
                quality_exp: a.exp().unwrap_or(i64::MIN),
                eps: level.eps.clone(),
                holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_eps = schedule.last().map_or(Ok(BigRational::one()), |l| parse_rational(&l.eps))?;
    let di_report = di_test(&seq, &last_eps, f);
    let di_non_strict_below_root = di_report.entries.iter().skip(1).all(|e| e.cmp != Ordering::Greater);
    let caveats = vec![
        "membership of each node in Q_{ε,N} is certified by provenance (produced as a child of its parent)".into(),
        "θ is the centre of the last ball; containment of a tail of every admissible sequence is not checked at finite depth".into(),
        "the strict inequality λ̂_1 < ε can fail by equality at nodes; the non-strict form is certified".into(),
    ];
    let mut cert = DiCertificate {
        kind: kind.into(),
        q,
        d,
        chooser,
        root: root.canonical(f),
        links,
        theta,
        theta_prefix,
        best_approx_degrees: best.iter().map(ApproxPair::deg).collect(),
        chain_in_best_approx,
        quality_below_lambda1,
        dirichlet,
        di_report,
        di_non_strict_below_root,
        caveats,
        checksum: String::new(),
    };
    cert.checksum = cert.compute_checksum();
    Ok(cert)
}

/// A chain of `steps` nodes below `root` with constant `(ε, N)`.
pub fn build_di_certificate(
    eps: &BigRational,
    n_max: u32,
    steps: usize,
    root: &ApproxPair,
    chooser: Chooser,
    f: &Field,
) -> Result<DiCertificate> {
    check_eps(eps)?;
    let level = ScheduleLevel { level: 0, eps_analytic: None, eps: fmt_rational(eps), n_max };
    let schedule: Vec<ScheduleLevel> = (0..steps).map(|i| ScheduleLevel { level: i as i64, ..level.clone() }).collect();
    build_chain("di", &schedule, root, chooser, f)
}

/// A chain whose level-`i` children are drawn with `(ε_i, N_i)` for `i = start, start+1, …`.
pub fn build_sing_prefix(start: i64, levels: usize, d: usize, chooser: Chooser, f: &Field) -> Result<DiCertificate> {
    let schedule = (0..levels as i64)
        .map(|j| sing_schedule(start + j, f.q()))
        .collect::<Result<Vec<_>>>()?;
    build_chain("sing", &schedule, &ApproxPair::root(d), chooser, f)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub checksum_matches: bool,
    /// Rebuilding from the recorded parameters reproduces the file byte for byte.
    pub rebuild_identical: bool,
    /// Every link re-verified from the recorded nodes alone.
    pub links_recheck: bool,
    pub failures: Vec<String>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.checksum_matches && self.rebuild_identical && self.links_recheck && self.failures.is_empty()
    }
}

/// Re-executes every check of a certificate.
pub fn replay_certificate(json: &str) -> Result<ReplayReport> {
    let cert: DiCertificate =
        serde_json::from_str(json).map_err(|e| Error::Certificate(format!("unreadable certificate: {e}")))?;
    let f = Field::of_order(cert.q)?;
    let mut failures = Vec::new();
    let checksum_matches = cert.compute_checksum() == cert.checksum;
    if !checksum_matches {
        failures.push("checksum mismatch".into());
    }
    let mut links_recheck = true;
    let mut parent = LowerNode::new(&cert.root, &f);
    for l in &cert.links {
        let eps = parse_rational(&l.schedule.eps)?;
        let checks = check_child(&parent, &l.v, &eps, &f)?;
        if checks != l.checks || !checks.all() {
            links_recheck = false;
            failures.push(format!("link {} fails re-verification", l.index));
        }
        if pi_u(parent.u(), &l.v, &f) != l.alpha.vector(&parent, &f) {
            links_recheck = false;
            failures.push(format!("link {}: recorded α is not π_u(v)", l.index));
        }
        parent = LowerNode::new(&l.v, &f);
    }
    let schedule: Vec<ScheduleLevel> = cert.links.iter().map(|l| l.schedule.clone()).collect();
    let rebuilt = build_chain(&cert.kind, &schedule, &cert.root, cert.chooser, &f)?;
    let rebuild_identical = rebuilt.to_json() == cert.to_json() && rebuilt.to_json() == json.trim_end();
    if !rebuild_identical {
        failures.push("rebuilt certificate differs".into());
    }
    if !rebuilt.passes() {
        failures.push("a recorded inequality fails".into());
    }
    Ok(ReplayReport { checksum_matches, rebuild_identical, links_recheck, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Field, LowerNode, BigRational) {
        let f = Field::of_order(2).unwrap();
        let root = LowerNode::root(2, &f);
        (f, root, rat(1, 4))
    }

    #[test]
    fn root_windows() {
        let (f, root, eps) = setup();
        assert_eq!(zeta_window(&root, 0, &eps, 2), 4..=6);
        assert_eq!(zeta_window(&root, 1, &eps, 2), 6..=8);
        let t = t_window(&root, &eps, 1, &f);
        assert_eq!((t.t0, t.t_n), (6, 8));
        assert!(t.t0_integral);
    }

    #[test]
    fn root_children() {
        let (f, root, eps) = setup();
        let kids = enumerate_children(&root, &eps, 1, &f).unwrap();
        assert_eq!(kids.len(), 16 + 32 + 64 + 2 * (64 + 128 + 256));
        for c in kids.iter().step_by(37) {
            assert!(check_child(&root, &c.v, &eps, &f).unwrap().all());
        }
    }

    #[test]
    fn lambda_alpha_of_unit_vector() {
        let (f, root, _) = setup();
        let a = AlphaVector { m: vec![Poly::zero()], n: Poly::one() };
        let lat = lambda_alpha(&root, &a, &f).unwrap();
        assert_eq!(lat.rank(), 1);
        assert_eq!(lat.covolume_exp(), 0);
        assert_eq!(lambda1_hat_alpha_exp(&root, &a, &f).unwrap(), QExp::from_integer(0));
    }

    #[test]
    fn xn_example() {
        let (f, root, eps) = setup();
        let c = count_xn(&root, &Poly::x(), &eps, &f).unwrap();
        assert_eq!(c.bound, rat(5, 8));
        assert!(c.count >= 1 && c.holds);
    }

    #[test]
    fn schedule_snapping() {
        let s = sing_schedule(9, 2).unwrap();
        assert_eq!(s.eps, "1/4");
        assert_eq!(s.n_max, 10);
        assert!(sing_schedule(1, 2).is_err());
    }

    #[test]
    fn root_separation_and_sums() {
        let (f, root, eps) = setup();
        let kids: Vec<ApproxPair> = enumerate_children(&root, &eps, 1, &f).unwrap().into_iter().map(|c| c.v).collect();
        let sep = verify_separation(&root, &kids, &eps, 1, &f).unwrap();
        assert!(sep.distances_are_center_distances && sep.bound_holds, "{sep:?}");
        assert_eq!(sep.bound_exp_floor, -16);
        let fs = f_n_sum_check(&root, &eps, 1, &rat(4, 3), &f).unwrap();
        assert!(fs.holds, "{fs:?}");
        for k in 6..=8 {
            let s = shell_alpha_count(&root, &eps, k, &f).unwrap();
            assert_eq!(s.holds, Some(true), "{s:?}");
        }
    }

    #[test]
    fn certificate_replays() {
        let f = Field::of_order(2).unwrap();
        let cert = build_di_certificate(&rat(1, 4), 1, 4, &ApproxPair::root(2), Chooser::LexicographicFirst, &f).unwrap();
        assert!(cert.passes(), "{}", cert.to_json());
        let rep = replay_certificate(&cert.to_json()).unwrap();
        assert!(rep.ok(), "{rep:?}");
        let mut bad = cert.clone();
        bad.links[1].k += 1;
        assert!(!replay_certificate(&bad.to_json()).unwrap().ok());
    }
}
