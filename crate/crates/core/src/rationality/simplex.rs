//! Dense tableau simplex for `max cᵀx` subject to `A x ≤ b`, `x ≥ 0`, `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. Pivots follow Bland's
//! rule, which cannot cycle on degenerate vertices.

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Solves the program; `a` is row-major with one row per constraint.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::Shape {
            expected: m,
            found: b.len(),
        });
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::Shape {
            expected: n,
            found: row.len(),
        });
    }
    if b.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Lp("right-hand side must be nonnegative".into()));
    }

    // Columns: n structural, m slack, then the right-hand side.
    let width = n + m + 1;
    let mut tab = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        tab[i][..n].copy_from_slice(&a[i]);
        tab[i][n + i] = 1.0;
        tab[i][width - 1] = b[i];
    }
    // Objective row holds reduced costs −c; optimality when all are ≥ 0.
    for j in 0..n {
        tab[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..MAX_PIVOTS {
        let Some(col) = (0..n + m).find(|&j| tab[m][j] < -EPS) else {
            let mut x = vec![0.0; n];
            for (i, &var) in basis.iter().enumerate() {
                if var < n {
                    x[var] = tab[i][width - 1];
                }
            }
            return Ok(LpSolution {
                objective: tab[m][width - 1],
                x,
            });
        };
        // Ratio test; ties broken by the smallest basic index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = tab[i][col];
            if coef > EPS {
                let ratio = tab[i][width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Lp("objective is unbounded".into()));
        };
        pivot(&mut tab, row, col);
        basis[row] = col;
    }
    Err(Error::Lp(format!("no optimum after {MAX_PIVOTS} pivots")))
}

fn pivot(tab: &mut [Vec<f64>], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
}
