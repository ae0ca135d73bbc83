//! Closed-form dimension bounds for `DI_d(ε)` and the ranges of `ε` where they say
//! something: `d²/(d+1) + d/(d+1) log_q(1 + √((q−1)²(q+1)^d q^{2d} ε^d))` from above and
//! `d²/(d+1) + d/(d+1) log_q(1 + (q−1)² q^{−2d−d²/(d−1)} ((q−1)/q − ε^{d−1}) ε^d)` from below.
//!
//! Values are evaluated in `f64` (`ln_1p` keeps the small increments accurate to about
//! `1e−16` relative); every region predicate is decided in exact rational arithmetic.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qexp::{fmt_rational, qpow_rat, rat, rat_pow, to_f64};

/// Arithmetic tolerance reported for the bound values.
pub const TOLERANCE: f64 = 1e-12;

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("d = {d} must be at least 2")));
    }
    Ok(())
}

fn check_q(q: u32) -> Result<()> {
    crate::ffpoly::FieldSpec::of_order(q).map(|_| ())
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if *eps <= BigRational::zero() {
        return Err(Error::OutOfRange("ε must be positive".into()));
    }
    Ok(())
}

/// `d²/(d+1)`.
pub fn base_dim(d: usize) -> Result<BigRational> {
    check_d(d)?;
    let d = d as i64;
    Ok(rat(d * d, d + 1))
}

fn log_q_1p(q: u32, x: f64) -> f64 {
    x.ln_1p() / (q as f64).ln()
}

/// `(q−1)²(q+1)^d q^{2d} ε^d`, the radicand of the upper bound.
fn upper_radicand(q: u32, d: usize, eps: &BigRational) -> BigRational {
    let (qi, di) = (q as i64, d as i64);
    rat((qi - 1) * (qi - 1), 1) * rat_pow(&rat(qi + 1, 1), di) * qpow_rat(q, 2 * di) * rat_pow(eps, di)
}

/// `upper_bound − d²/(d+1)`, kept separate so that tiny increments are not absorbed.
pub fn upper_excess(q: u32, d: usize, eps: &BigRational) -> Result<f64> {
    check_q(q)?;
    check_d(d)?;
    check_eps(eps)?;
    let df = d as f64;
    let x = to_f64(&upper_radicand(q, d, eps)).sqrt();
    Ok(df / (df + 1.0) * log_q_1p(q, x))
}

pub fn upper_bound(q: u32, d: usize, eps: &BigRational) -> Result<f64> {
    Ok(to_f64(&base_dim(d)?) + upper_excess(q, d, eps)?)
}

/// `lim sup (upper_bound − base)/ε^{d/2}` as `ε → 0`: `d/(d+1)·(q−1)(q+1)^{d/2}q^d / ln q`.
pub fn upper_rate(q: u32, d: usize) -> f64 {
    let (qf, df) = (q as f64, d as f64);
    df / (df + 1.0) * (qf - 1.0) * (qf + 1.0).powf(df / 2.0) * qf.powf(df) / qf.ln()
}

/// `lim sup (lower_bound − base)/ε^d` as `ε → 0`.
pub fn lower_rate(q: u32, d: usize) -> f64 {
    let (qf, df) = (q as f64, d as f64);
    let e = -(2.0 * df * (df - 1.0) + df * df) / (df - 1.0);
    df / (df + 1.0) * (qf - 1.0).powi(2) * (qf - 1.0) / qf * qf.powf(e) / qf.ln()
}

/// `(q−1)/q − ε^{d−1}`; positive exactly on the validity range of the lower bound.
fn lower_margin(q: u32, d: usize, eps: &BigRational) -> BigRational {
    rat(q as i64 - 1, q as i64) - rat_pow(eps, d as i64 - 1)
}

/// `lower_bound − d²/(d+1)`.
pub fn lower_excess(q: u32, d: usize, eps: &BigRational) -> Result<f64> {
    check_q(q)?;
    check_d(d)?;
    check_eps(eps)?;
    let margin = lower_margin(q, d, eps);
    if margin <= BigRational::zero() {
        return Err(Error::OutOfRange(format!(
            "ε = {} must satisfy ε^(d−1) < (q−1)/q",
            fmt_rational(eps)
        )));
    }
    let (qi, di) = (q as i64, d as i64);
    // q^{−2d − d²/(d−1)} = q^{−(2d(d−1) + d²)/(d−1)}
    let e = -((2 * di * (di - 1) + di * di) as f64) / (di - 1) as f64;
    let c = to_f64(&(rat((qi - 1) * (qi - 1), 1) * margin * rat_pow(eps, di)));
    let x = c * (q as f64).powf(e);
    let df = d as f64;
    Ok(df / (df + 1.0) * log_q_1p(q, x))
}

pub fn lower_bound(q: u32, d: usize, eps: &BigRational) -> Result<f64> {
    Ok(to_f64(&base_dim(d)?) + lower_excess(q, d, eps)?)
}

/// `(d(q−1)/((2d−1)q))^{1/(d−1)}` as (base, exponent denominator `d − 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootEdge {
    #[serde(with = "crate::qexp::serde_rational")]
    pub base: BigRational,
    pub root: u32,
}

impl RootEdge {
    pub fn value(&self) -> f64 {
        to_f64(&self.base).powf(1.0 / self.root as f64)
    }
    /// Exact `ε <= edge`, i.e. `ε^{root} <= base`.
    pub fn at_least(&self, eps: &BigRational) -> bool {
        rat_pow(eps, self.root as i64) <= self.base
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Regions {
    /// The lower bound increases in `ε` up to this edge.
    pub lower_monotone_edge: RootEdge,
    /// The upper bound is below the trivial `d` up to this edge, `1/((q+1)q²)`.
    #[serde(with = "crate::qexp::serde_rational")]
    pub upper_nontrivial_edge: BigRational,
}

pub fn regions(q: u32, d: usize) -> Result<Regions> {
    check_q(q)?;
    check_d(d)?;
    let (qi, di) = (q as i64, d as i64);
    Ok(Regions {
        lower_monotone_edge: RootEdge { base: rat(di * (qi - 1), (2 * di - 1) * qi), root: (d - 1) as u32 },
        upper_nontrivial_edge: rat(1, (qi + 1) * qi * qi),
    })
}

/// `upper_bound(q, d, ε) <= d`, decided exactly: `(q+1)^d q^{2d} ε^d <= 1`.
pub fn upper_nontrivial(q: u32, d: usize, eps: &BigRational) -> bool {
    upper_radicand(q, d, eps) <= rat((q as i64 - 1) * (q as i64 - 1), 1)
}

/// `ε` lies in the range where the lower bound is increasing.
pub fn lower_monotone(q: u32, d: usize, eps: &BigRational) -> Result<bool> {
    Ok(regions(q, d)?.lower_monotone_edge.at_least(eps))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub q: u32,
    pub d: usize,
    pub eps: String,
    pub base: f64,
    /// Empty when `ε` is outside the validity range of the lower bound.
    pub lower: Option<f64>,
    pub upper: f64,
    pub lower_monotone: bool,
    pub upper_nontrivial: bool,
}

pub fn bound_report(q: u32, d: usize, eps: &BigRational) -> Result<BoundReport> {
    let base = to_f64(&base_dim(d)?);
    let lower = match lower_bound(q, d, eps) {
        Ok(v) => Some(v),
        Err(Error::OutOfRange(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundReport {
        q,
        d,
        eps: fmt_rational(eps),
        base,
        lower,
        upper: upper_bound(q, d, eps)?,
        lower_monotone: lower_monotone(q, d, eps)?,
        upper_nontrivial: upper_nontrivial(q, d, eps),
    })
}

pub fn bounds_table(q: u32, d: usize, grid: &[BigRational]) -> Result<Vec<BoundReport>> {
    grid.iter().map(|e| bound_report(q, d, e)).collect()
}

/// The lower bound is strictly increasing in `ε` over the grid points that lie in the
/// monotone region and the validity range. Compared on `lower − base`, which keeps full
/// precision where the bound itself rounds to the base.
pub fn lower_increasing_on_grid(q: u32, d: usize, grid: &[BigRational]) -> Result<bool> {
    let mut pts = Vec::new();
    for e in grid {
        if lower_monotone(q, d, e)? && lower_margin(q, d, e) > BigRational::zero() {
            pts.push((e, lower_excess(q, d, e)?));
        }
    }
    pts.sort_by(|a, b| a.0.cmp(b.0));
    Ok(pts.windows(2).all(|w| w[0].1 < w[1].1 || w[0].0 == w[1].0))
}

pub fn to_csv(rows: &[BoundReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["q", "d", "eps", "base", "lower", "upper", "lower_monotone", "upper_nontrivial"])
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// `q^{-k}` for `k` in `from..=to`.
pub fn q_power_grid(q: u32, from: i64, to: i64) -> Vec<BigRational> {
    (from..=to).map(|k| qpow_rat(q, -k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        assert_eq!(base_dim(2).unwrap(), rat(4, 3));
        assert_eq!(base_dim(3).unwrap(), rat(9, 4));
        let u = upper_bound(2, 2, &rat(1, 16)).unwrap();
        assert!((u - (4.0 / 3.0 + 2.0 / 3.0 * 1.75f64.log2())).abs() < 1e-14);
        let l = lower_bound(2, 2, &rat(1, 4)).unwrap();
        assert!((l - (4.0 / 3.0 + 2.0 / 3.0 * (1.0 + 1.0 / 16384.0f64).log2())).abs() < 1e-14);
    }

    #[test]
    fn region_edges() {
        let r = regions(2, 2).unwrap();
        assert_eq!(r.lower_monotone_edge.base, rat(1, 3));
        assert_eq!(r.upper_nontrivial_edge, rat(1, 12));
        let r3 = regions(3, 2).unwrap();
        assert_eq!(r3.lower_monotone_edge.base, rat(4, 9));
        assert_eq!(r3.upper_nontrivial_edge, rat(1, 36));
        assert!(upper_nontrivial(2, 2, &rat(1, 12)));
        assert!(!upper_nontrivial(2, 2, &rat(1, 8)));
        assert!(upper_bound(2, 2, &rat(1, 8)).unwrap() > 2.0);
    }

    #[test]
    fn lower_range_checked() {
        assert!(lower_bound(2, 2, &rat(1, 2)).is_err());
        assert!(lower_bound(2, 2, &rat(0, 1)).is_err());
        assert!(upper_bound(6, 2, &rat(1, 4)).is_err());
    }
}
