//! Dirichlet improvability on a finite prefix of best approximations.
//!
//! `θ ∈ DI_d(ε)` exactly when `|u_n|^{1/d} r(u_n) < ε` for all large `n`; a finite
//! prefix can only be *consistent* with that. The comparison is done exactly as
//! `|u_n| r(u_n)^d` versus `ε^d`, with `r(u_n) = λ_1(Λ_{u_n})` from the Farey lattice.

use std::cmp::Ordering;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::best::BestApproxSeq;
use super::farey::farey_lattice;
use crate::ffpoly::Field;
use crate::qexp::{cmp_qpow, fmt_rational, rat_pow, QExp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiEntry {
    pub deg_u: i64,
    /// `log_q r(u_n)`.
    pub r_exp: i64,
    /// `|u_n| r(u_n)^d` compared with `ε^d`.
    #[serde(with = "ordering_serde")]
    pub cmp: Ordering,
    /// Strict inequality `|u_n|^{1/d} r(u_n) < ε`.
    pub passes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiVerdict {
    /// The inequality holds from `tail_from` to the end of the prefix.
    ConsistentWithDi,
    /// The last entry violates the inequality.
    Inconsistent,
    /// `θ` is rational (some `A = 0`); no asymptotic statement is made.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiReport {
    pub eps: String,
    pub entries: Vec<DiEntry>,
    /// First index from which every entry passes (strictly).
    pub tail_from: Option<usize>,
    /// Every entry satisfies the non-strict inequality `<= ε`.
    pub all_non_strict: bool,
    pub verdict: DiVerdict,
}

pub fn di_test(seq: &BestApproxSeq, eps: &BigRational, f: &Field) -> DiReport {
    let d = seq.entries.first().map_or(1, |e| e.u.d()) as i64;
    let eps_d = rat_pow(eps, d);
    let entries: Vec<DiEntry> = seq
        .entries
        .iter()
        .map(|e| {
            let r_exp = farey_lattice(&e.u, f).r_exp();
            let cmp = cmp_qpow(f.q(), QExp::from_integer(e.u.deg() + d * r_exp), &eps_d);
            DiEntry { deg_u: e.u.deg(), r_exp, cmp, passes: cmp == Ordering::Less }
        })
        .collect();
    let tail_from = match entries.iter().rposition(|e| !e.passes) {
        None if entries.is_empty() => None,
        None => Some(0),
        Some(i) if i + 1 < entries.len() => Some(i + 1),
        Some(_) => None,
    };
    let all_non_strict = entries.iter().all(|e| e.cmp != Ordering::Greater);
    let verdict = if seq.rational_terminated {
        DiVerdict::Degenerate
    } else if tail_from.is_some() {
        DiVerdict::ConsistentWithDi
    } else {
        DiVerdict::Inconsistent
    };
    DiReport { eps: fmt_rational(eps), entries, tail_from, all_non_strict, verdict }
}

mod ordering_serde {
    use std::cmp::Ordering;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(o: &Ordering, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(*o as i8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ordering, D::Error> {
        Ok(i8::deserialize(d)?.cmp(&0))
    }
}
