use std::sync::Arc;

use num::Zero;

use crate::chart::Chart;
use crate::element::SuperElement;
use crate::error::{Error, Result};
use crate::Q;

/// Solve `sum_b c_b * columns[b][r] = rhs[r]` for left-module coefficients
/// `c_b` over the chart algebra, by Gaussian elimination with unit-body
/// pivots. Pivot selection is deterministic: the first unit-body entry in
/// canonical (row-major) order. All rewriting steps multiply equations on
/// the right, which is order-safe in the graded-commutative ring.
pub fn solve_left_module(
    chart: &Arc<Chart>,
    columns: &[Vec<SuperElement>],
    rhs: &[SuperElement],
) -> Result<Vec<SuperElement>> {
    let ncols = columns.len();
    let nrows = rhs.len();
    for col in columns {
        assert_eq!(col.len(), nrows);
    }
    // augmented equations: per row r, sum_b c_b A[r][b] = R[r]
    let mut a: Vec<Vec<SuperElement>> = (0..nrows)
        .map(|r| (0..ncols).map(|b| columns[b][r].clone()).collect())
        .collect();
    let mut r_vec: Vec<SuperElement> = rhs.to_vec();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut used_rows = vec![false; nrows];

    for b in 0..ncols {
        // first unit-body entry in canonical order
        let mut pivot_row = None;
        for (r, used) in used_rows.iter().enumerate() {
            if !used && a[r][b].is_unit() {
                pivot_row = Some(r);
                break;
            }
        }
        let pr = match pivot_row {
            Some(r) => r,
            None => {
                // column may be expressible by others; defer (handled below
                // by the consistency check)
                continue;
            }
        };
        used_rows[pr] = true;
        pivot_of_col[b] = Some(pr);
        let inv = a[pr][b].invert()?;
        // normalize the pivot row: multiply the equation on the right by inv
        for x in a[pr].iter_mut() {
            *x = x.checked_mul(&inv)?;
        }
        r_vec[pr] = r_vec[pr].checked_mul(&inv)?;
        // eliminate the column elsewhere
        for r in 0..nrows {
            if r == pr || a[r][b].is_zero() {
                continue;
            }
            let factor = a[r][b].clone();
            let pivot_row_copy = a[pr].clone();
            for (x, p) in a[r].iter_mut().zip(pivot_row_copy.iter()) {
                *x = x.checked_sub(&p.checked_mul(&factor)?)?;
            }
            let adj = r_vec[pr].checked_mul(&factor)?;
            r_vec[r] = r_vec[r].checked_sub(&adj)?;
        }
    }

    // read off solution
    let mut solution = vec![SuperElement::zero(chart); ncols];
    for (b, pivot) in pivot_of_col.iter().enumerate() {
        match pivot {
            Some(r) => solution[b] = r_vec[*r].clone(),
            None => return Err(Error::Singular(b)),
        }
    }
    // consistency: rows without pivots must have vanished
    for (r, used) in used_rows.iter().enumerate() {
        if !used {
            let all_zero = a[r].iter().all(|x| x.is_zero());
            if !all_zero || !r_vec[r].is_zero() {
                return Err(Error::Singular(r));
            }
        }
    }
    Ok(solution)
}

/// Whether the square matrix given by columns over the chart algebra is
/// invertible with unit-body determinant, decided by elimination.
pub fn has_unit_body_determinant(chart: &Arc<Chart>, columns: &[Vec<SuperElement>]) -> bool {
    let n = columns.len();
    if n == 0 {
        return true;
    }
    // the body of the determinant equals the determinant of the bodies:
    // expand over the commutative body algebra
    let body: Vec<Vec<SuperElement>> = columns
        .iter()
        .map(|col| col.iter().map(|e| e.body()).collect())
        .collect();
    match det_commutative(chart, &body) {
        Ok(d) => d.is_unit(),
        Err(_) => false,
    }
}

/// Cofactor determinant over the (commutative) body algebra.
fn det_commutative(chart: &Arc<Chart>, cols: &[Vec<SuperElement>]) -> Result<SuperElement> {
    let n = cols.len();
    if n == 0 {
        return Ok(SuperElement::one(chart));
    }
    if n == 1 {
        return Ok(cols[0][0].clone());
    }
    let mut acc = SuperElement::zero(chart);
    for (j, col) in cols.iter().enumerate() {
        if col[0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SuperElement>> = cols
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, c)| c[1..].to_vec())
            .collect();
        let mut term = col[0].checked_mul(&det_commutative(chart, &minor)?)?;
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

/// Rank of a rational matrix (rows of equal length) over the rationals.
pub fn rational_rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        let mut pivot = None;
        for (r, mrow) in m.iter().enumerate().take(nrows).skip(row) {
            if !mrow[col].is_zero() {
                pivot = Some(r);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[row].clone();
                for (x, pv) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &(pv * &f);
                }
            }
        }
        rank += 1;
        row += 1;
        if row == nrows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn chart() -> Arc<Chart> {
        Chart::new(
            "C",
            vec![("t".into(), true)],
            vec!["s1".into(), "s2".into()],
        )
        .unwrap()
    }

    #[test]
    fn solve_diagonal_with_nilpotent_entries() {
        let c = chart();
        let t = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let s2 = SuperElement::odd_gen(&c, 1);
        let s1s2 = s1.checked_mul(&s2).unwrap();
        // columns of [[t, 0], [s1 s2, 1]]
        let col0 = vec![t.clone(), s1s2.clone()];
        let col1 = vec![SuperElement::zero(&c), SuperElement::one(&c)];
        // rhs = 1*col0 + s1s2*col1 - s1s2... pick target c0 = 2/t, c1 = s1
        let c0 = t.invert().unwrap().scale(&Q::from_integer(2.into()));
        let c1 = s1.clone();
        let rhs = vec![
            c0.checked_mul(&col0[0]).unwrap(),
            c0.checked_mul(&col0[1])
                .unwrap()
                .checked_add(&c1.checked_mul(&col1[1]).unwrap())
                .unwrap(),
        ];
        let sol = solve_left_module(&c, &[col0, col1], &rhs).unwrap();
        assert_eq!(sol[0], c0);
        assert_eq!(sol[1], c1);
    }

    #[test]
    fn unit_body_determinant_detects_nilpotent_degeneracy() {
        let c = chart();
        let t = SuperElement::even_gen(&c, 0);
        let s1 = SuperElement::odd_gen(&c, 0);
        let one = SuperElement::one(&c);
        // [[t, s1],[s1, 1]] has body det = t, a unit
        let cols = vec![vec![t.clone(), s1.clone()], vec![s1.clone(), one.clone()]];
        assert!(has_unit_body_determinant(&c, &cols));
        // [[s1, 0],[0, 1]] has body det = 0
        let cols = vec![
            vec![s1.clone(), SuperElement::zero(&c)],
            vec![SuperElement::zero(&c), one],
        ];
        assert!(!has_unit_body_determinant(&c, &cols));
    }

    #[test]
    fn rational_rank_basic() {
        let one = Q::one;
        let rows = vec![
            vec![one(), Q::zero()],
            vec![one(), Q::zero()],
            vec![Q::zero(), one()],
        ];
        assert_eq!(rational_rank(&rows), 2);
    }
}
