//! Column reduction of polynomial matrices: Mulders–Storjohann weak Popov form,
//! followed by normalisation to the (unique) Popov form.
//!
//! A column's degree is the maximum degree of its entries and its leading position
//! is the last row attaining that degree. Weak Popov means distinct leading
//! positions among nonzero columns; the leading coefficient vectors are then
//! linearly independent, so the column degrees are the successive minima.

use crate::ffpoly::{Field, Poly};

/// A polynomial matrix stored as a list of columns, each of length `rows`.
pub type PolyCols = Vec<Vec<Poly>>;

pub fn col_deg(col: &[Poly]) -> i64 {
    col.iter().map(Poly::deg).max().unwrap_or(-1)
}

/// Last row of maximal degree; `None` for the zero column.
pub fn leading_pos(col: &[Poly]) -> Option<usize> {
    let d = col_deg(col);
    if d < 0 {
        return None;
    }
    col.iter().rposition(|p| p.deg() == d)
}

/// `col_t -= c x^e col_s`.
fn sub_col(cols: &mut PolyCols, t: usize, s: usize, c: u8, e: usize, f: &Field) {
    debug_assert_ne!(t, s);
    let (src, dst) = if s < t {
        let (a, b) = cols.split_at_mut(t);
        (&a[s], &mut b[0])
    } else {
        let (a, b) = cols.split_at_mut(s);
        (&b[0], &mut a[t])
    };
    for (x, y) in dst.iter_mut().zip(src.iter()) {
        x.sub_scaled_shift(y, c, e, f);
    }
}

/// Brings the columns into weak Popov form, dropping zero columns.
/// The lattice generated by the columns is unchanged.
pub fn weak_popov(cols: &mut PolyCols, f: &Field) {
    cols.retain(|c| col_deg(c) >= 0);
    let rows = cols.first().map_or(0, Vec::len);
    let mut deg: Vec<i64> = cols.iter().map(|c| col_deg(c)).collect();
    let mut lp: Vec<usize> = cols.iter().map(|c| leading_pos(c).unwrap()).collect();
    loop {
        let mut owner: Vec<Option<usize>> = vec![None; rows];
        let mut conflict = None;
        for j in 0..cols.len() {
            if deg[j] < 0 {
                continue;
            }
            match owner[lp[j]] {
                None => owner[lp[j]] = Some(j),
                Some(k) => {
                    conflict = Some((j, k));
                    break;
                }
            }
        }
        let Some((j, k)) = conflict else { break };
        // reduce the column of larger degree (ties: the later one) by the other
        let (t, s) = if deg[j] > deg[k] || (deg[j] == deg[k] && j > k) { (j, k) } else { (k, j) };
        let r = lp[t];
        let c = f.div(cols[t][r].lc(), cols[s][r].lc());
        let e = (deg[t] - deg[s]) as usize;
        sub_col(cols, t, s, c, e, f);
        deg[t] = col_deg(&cols[t]);
        if deg[t] >= 0 {
            lp[t] = leading_pos(&cols[t]).unwrap();
        }
    }
    let mut i = 0;
    cols.retain(|_| {
        let keep = deg[i] >= 0;
        i += 1;
        keep
    });
}

/// Normalises a weak Popov matrix to Popov form: pivots monic and every other entry
/// in a pivot row of degree below the pivot. Column degrees and pivot rows are
/// preserved; the result depends only on the lattice. Columns are then sorted by
/// `(degree, pivot row)`.
pub fn popov(cols: &mut PolyCols, f: &Field) {
    let n = cols.len();
    let deg: Vec<i64> = cols.iter().map(|c| col_deg(c)).collect();
    let lp: Vec<usize> = cols.iter().map(|c| leading_pos(c).unwrap()).collect();
    loop {
        let mut changed = false;
        for k in 0..n {
            let (i, ck) = (lp[k], deg[k]);
            for j in 0..n {
                if j == k {
                    continue;
                }
                loop {
                    let dij = cols[j][i].deg();
                    if dij < ck {
                        break;
                    }
                    let c = f.div(cols[j][i].lc(), cols[k][i].lc());
                    sub_col(cols, j, k, c, (dij - ck) as usize, f);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for k in 0..n {
        let c = f.inv(cols[k][lp[k]].lc());
        if c != 1 {
            for p in cols[k].iter_mut() {
                *p = p.scale(c, f);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| (deg[k], lp[k]));
    let sorted: PolyCols = order.iter().map(|&k| std::mem::take(&mut cols[k])).collect();
    *cols = sorted;
}

/// Checks the weak Popov property (distinct leading positions, no zero columns).
pub fn is_weak_popov(cols: &PolyCols) -> bool {
    let mut seen = std::collections::HashSet::new();
    cols.iter().all(|c| leading_pos(c).is_some_and(|p| seen.insert(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[u8]) -> Poly {
        Poly::from_coeffs(c.iter().copied())
    }

    #[test]
    fn generating_set_drops_a_column() {
        let f = Field::of_order(2).unwrap();
        // columns x*e1, x*e2, (1, x+1): rank 2 with three generators
        let mut cols = vec![vec![p(&[0, 1]), p(&[])], vec![p(&[]), p(&[0, 1])], vec![p(&[1]), p(&[1, 1])]];
        weak_popov(&mut cols, &f);
        assert_eq!(cols.len(), 2);
        assert!(is_weak_popov(&cols));
        popov(&mut cols, &f);
        let degs: Vec<i64> = cols.iter().map(|c| col_deg(c)).collect();
        assert_eq!(degs.iter().sum::<i64>(), 1);
    }
}
