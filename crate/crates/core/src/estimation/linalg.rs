use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const CONSTANT_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;
const NULL_LOADING_TOL: f64 = 1e-6;

/// A regression design with constant columns removed and the rest scaled to
/// unit root-mean-square. Column 0 must be the intercept.
pub(crate) struct Design {
    x: DMatrix<f64>,
    scales: Vec<f64>,
    kept: Vec<usize>,
    width: usize,
}

impl Design {
    /// `rows` holds one basis row per observation.
    pub(crate) fn new(rows: &[Vec<f64>], labels: &[String]) -> Result<Self> {
        let width = labels.len();
        let n = rows.len();
        if n <= width {
            return Err(Error::SingularDesign {
                columns: labels.to_vec(),
            });
        }
        let mut kept = vec![0];
        for j in 1..width {
            let (lo, hi) = rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                });
            if hi - lo > CONSTANT_TOL * lo.abs().max(hi.abs()).max(1.0) {
                kept.push(j);
            }
        }
        let scales: Vec<f64> = kept
            .iter()
            .map(|&j| (rows.iter().map(|r| r[j] * r[j]).sum::<f64>() / n as f64).sqrt())
            .collect();
        let x = DMatrix::from_fn(n, kept.len(), |i, c| rows[i][kept[c]] / scales[c]);

        let sv = x.clone().svd(false, true);
        let smax = sv.singular_values.max();
        let (imin, smin) = sv.singular_values.argmin();
        if !(smin > RANK_TOL * smax) {
            let v_t = sv.v_t.as_ref().expect("right singular vectors requested");
            let null = v_t.row(imin);
            let peak = null.amax();
            let columns = null
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > NULL_LOADING_TOL * peak)
                .map(|(c, _)| labels[kept[c]].clone())
                .collect();
            return Err(Error::SingularDesign { columns });
        }
        Ok(Self {
            x,
            scales,
            kept,
            width,
        })
    }

    /// Indices of the columns removed as constant.
    pub(crate) fn dropped(&self) -> Vec<usize> {
        (0..self.width).filter(|j| !self.kept.contains(j)).collect()
    }

    /// Least squares of `y` on `diag(weights) X` in scaled coordinates.
    pub(crate) fn solve(&self, weights: Option<&[f64]>, y: &[f64]) -> Result<Vec<f64>> {
        let mut a = self.x.clone();
        if let Some(w) = weights {
            for (i, mut row) in a.row_iter_mut().enumerate() {
                row *= w[i];
            }
        }
        let rhs = DVector::from_column_slice(y);
        let sv = a.svd(true, true);
        let smax = sv.singular_values.max();
        let sol = sv
            .solve(&rhs, RANK_TOL * smax)
            .map_err(|m| Error::Numeric {
                message: format!("least squares failed: {m}"),
                achieved: f64::NAN,
            })?;
        Ok(sol.iter().copied().collect())
    }

    /// Linear predictor `X c` for scaled coefficients.
    pub(crate) fn predict(&self, coef: &[f64]) -> Vec<f64> {
        (&self.x * DVector::from_column_slice(coef))
            .iter()
            .copied()
            .collect()
    }

    /// `Xᵀ v` in raw coordinates of the full design; dropped columns give 0.
    pub(crate) fn raw_transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let t = self.x.transpose() * DVector::from_column_slice(v);
        let mut out = vec![0.0; self.width];
        for (c, &j) in self.kept.iter().enumerate() {
            out[j] = t[c] * self.scales[c];
        }
        out
    }

    /// Raw-coordinate coefficients for the full design; dropped columns get 0.
    pub(crate) fn expand(&self, coef: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for (c, &j) in self.kept.iter().enumerate() {
            out[j] = coef[c] / self.scales[c];
        }
        out
    }
}
