//! Series estimation of budget-share moment surfaces from cross-sections.
//!
//! Each conditional share moment `W_kn(b) = E[w_k^n | b]` is modeled as
//! `exp(α + Σ_j Σ_s β_js (log p_j)^s + Σ_s γ_s (log y)^s + λ ê)` and fitted by
//! nonlinear least squares, with `ê` the residual of a first-stage regression
//! of log expenditure on the log instrument and log prices.

pub mod bootstrap;
mod first_stage;
mod fit;
mod linalg;
pub mod synthetic;

pub use bootstrap::{bootstrap, bootstrap_many, BootstrapConfig, BootstrapInterval};
pub use first_stage::{first_stage, FirstStageFit};
pub use fit::{
    fit_moment_surface, fit_moment_surfaces, fitted_surface, FittedSurface, MomentFit,
    FIT_MAX_ITERATIONS, LOG_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};

/// One household observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    /// Budget shares of the modeled goods.
    pub shares: Vec<f64>,
    /// Log prices of the modeled goods.
    pub log_prices: Vec<f64>,
    /// Log total expenditure.
    pub log_y: f64,
    /// Log instrument.
    pub log_z: f64,
}

const SHARE_SUM_SLACK: f64 = 1e-9;

/// A validated cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    goods: Vec<String>,
    rows: Vec<Household>,
}

impl Dataset {
    pub fn new(goods: Vec<String>, rows: Vec<Household>) -> Result<Self> {
        if goods.is_empty() {
            return Err(Error::Argument(
                "a dataset needs at least one modeled good".into(),
            ));
        }
        let k = goods.len();
        for (i, r) in rows.iter().enumerate() {
            if r.shares.len() != k {
                return Err(Error::Shape {
                    expected: k,
                    found: r.shares.len(),
                });
            }
            if r.log_prices.len() != k {
                return Err(Error::Shape {
                    expected: k,
                    found: r.log_prices.len(),
                });
            }
            if let Some(w) = r.shares.iter().find(|w| !(0.0..=1.0).contains(*w)) {
                return Err(Error::Argument(format!(
                    "row {i}: share {w} outside [0, 1]"
                )));
            }
            if r.shares.iter().sum::<f64>() > 1.0 + SHARE_SUM_SLACK {
                return Err(Error::Argument(format!(
                    "row {i}: modeled shares sum above 1"
                )));
            }
            if !(r.log_y.is_finite()
                && r.log_z.is_finite()
                && r.log_prices.iter().all(|v| v.is_finite()))
            {
                return Err(Error::Argument(format!("row {i}: non-finite value")));
            }
        }
        Ok(Self { goods, rows })
    }

    pub fn goods(&self) -> &[String] {
        &self.goods
    }

    pub fn n_goods(&self) -> usize {
        self.goods.len()
    }

    pub fn rows(&self) -> &[Household] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn good_index(&self, name: &str) -> Option<usize> {
        self.goods.iter().position(|g| g == name)
    }

    /// Budget of row `i` in levels.
    pub fn budget(&self, i: usize) -> Result<Budget> {
        let r = &self.rows[i];
        Budget::new(
            r.log_prices.iter().map(|v| v.exp()).collect(),
            r.log_y.exp(),
        )
    }

    /// Budget at the componentwise median of log prices and log expenditure.
    pub fn median_budget(&self) -> Result<Budget> {
        if self.rows.is_empty() {
            return Err(Error::DegenerateData("empty dataset".into()));
        }
        let prices = (0..self.n_goods())
            .map(|j| median(self.rows.iter().map(|r| r.log_prices[j]).collect()).exp())
            .collect();
        Budget::new(
            prices,
            median(self.rows.iter().map(|r| r.log_y).collect()).exp(),
        )
    }

    /// Rows at the given indices, with repetition.
    pub fn resample(&self, indices: &[usize]) -> Self {
        Self {
            goods: self.goods.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Degrees of the log-polynomial series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub price_degree: usize,
    pub income_degree: usize,
    pub include_control: bool,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            price_degree: 3,
            income_degree: 3,
            include_control: true,
        }
    }
}

impl BasisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.price_degree == 0 || self.income_degree == 0 {
            return Err(Error::Argument("basis degrees must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of basis columns for `goods` priced goods.
    pub fn width(&self, goods: usize) -> usize {
        1 + goods * self.price_degree + self.income_degree + usize::from(self.include_control)
    }

    /// Column labels matching [`BasisSpec::row`].
    pub fn labels(&self, goods: &[String]) -> Vec<String> {
        let mut out = vec!["intercept".to_string()];
        for g in goods {
            for s in 1..=self.price_degree {
                out.push(format!("log_p_{g}^{s}"));
            }
        }
        for s in 1..=self.income_degree {
            out.push(format!("log_y^{s}"));
        }
        if self.include_control {
            out.push("control".into());
        }
        out
    }

    /// Basis row at log prices, log expenditure and control residual.
    pub fn row(&self, log_prices: &[f64], log_y: f64, control: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width(log_prices.len()));
        out.push(1.0);
        for &lp in log_prices {
            push_powers(&mut out, lp, self.price_degree);
        }
        push_powers(&mut out, log_y, self.income_degree);
        if self.include_control {
            out.push(control);
        }
        out
    }
}

fn push_powers(out: &mut Vec<f64>, x: f64, degree: usize) {
    let mut v = 1.0;
    for _ in 0..degree {
        v *= x;
        out.push(v);
    }
}

#[cfg(test)]
mod tests;
