//! Dense tableau simplex for `max c'x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! Small problems only (the scheduling master problem has K+1 rows). The
//! all-slack basis is feasible, so there is no phase one. Bland's rule keeps
//! degenerate pivots from cycling and makes the pivot sequence deterministic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution<T> {
    pub x: Vec<T>,
    /// Row duals (shadow prices), all >= 0.
    pub duals: Vec<T>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: T,
}

pub(crate) fn maximize<T: Scalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> Result<LpSolution<T>> {
    let rows = a.len();
    let n = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != n) {
        return Err(Error::domain("simplex: inconsistent dimensions"));
    }
    if b.iter().any(|&v| v.is_nan() || v < T::zero()) {
        return Err(Error::domain("simplex: right-hand side must be >= 0"));
    }
    let width = n + rows + 1;
    let mut tab: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, &bi))| {
            let mut r = Vec::with_capacity(width);
            r.extend_from_slice(row);
            r.extend((0..rows).map(|j| if i == j { T::one() } else { T::zero() }));
            r.push(bi);
            r
        })
        .collect();
    let mut obj: Vec<T> = c
        .iter()
        .map(|&v| -v)
        .chain(std::iter::repeat_n(T::zero(), rows + 1))
        .collect();
    let mut basis: Vec<usize> = (n..n + rows).collect();
    let eps = T::tiny();
    let max_pivots = 50 * (n + rows) + 1000;

    for _ in 0..max_pivots {
        let Some(enter) = (0..n + rows).find(|&j| obj[j] < -eps) else {
            let mut x = vec![T::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = tab[i][width - 1];
                }
            }
            return Ok(LpSolution {
                x,
                duals: obj[n..n + rows].iter().map(|&v| v.max(T::zero())).collect(),
                objective: obj[width - 1],
            });
        };
        let mut leave: Option<usize> = None;
        let mut best = T::infinity();
        for i in 0..rows {
            let coef = tab[i][enter];
            if coef > eps {
                let ratio = tab[i][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - eps || (ratio <= best + eps && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(pr) = leave else {
            return Err(Error::domain("simplex: problem is unbounded"));
        };
        let piv = tab[pr][enter];
        for v in tab[pr].iter_mut() {
            *v = *v / piv;
        }
        let pivot_row = tab[pr].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != pr {
                let f = row[enter];
                if f != T::zero() {
                    for (v, &p) in row.iter_mut().zip(&pivot_row) {
                        *v = *v - f * p;
                    }
                }
            }
        }
        let f = obj[enter];
        for (v, &p) in obj.iter_mut().zip(&pivot_row) {
            *v = *v - f * p;
        }
        basis[pr] = enter;
    }
    Err(Error::domain("simplex: pivot limit reached"))
}
