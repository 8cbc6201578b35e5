use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::Design;
use super::{BasisSpec, Dataset, FirstStageFit};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::surface::{LogVar, QuantitySurface, ShareSurface};

/// Added to `w^n` before taking logs in the warm start.
pub const LOG_FLOOR: f64 = 1e-6;
pub const FIT_MAX_ITERATIONS: usize = 200;
const RSS_REL_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;
const MIN_POSITIVE_FRACTION: f64 = 0.95;

/// Coefficients of one fitted share moment `W_kn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFit {
    pub good: usize,
    pub order: usize,
    pub alpha: f64,
    /// `beta[j][s - 1]` multiplies `(log p_j)^s`.
    pub beta: Vec<Vec<f64>>,
    /// `gamma[s - 1]` multiplies `(log y)^s`.
    pub gamma: Vec<f64>,
    /// Coefficient on the first-stage residual, when included.
    pub control: Option<f64>,
    pub rss: f64,
    pub iters: usize,
}

impl MomentFit {
    fn from_raw(
        good: usize,
        order: usize,
        basis: &BasisSpec,
        goods: usize,
        raw: &[f64],
        rss: f64,
        iters: usize,
    ) -> Self {
        let pd = basis.price_degree;
        let beta = (0..goods)
            .map(|j| raw[1 + j * pd..1 + (j + 1) * pd].to_vec())
            .collect();
        let start = 1 + goods * pd;
        let gamma = raw[start..start + basis.income_degree].to_vec();
        Self {
            good,
            order,
            alpha: raw[0],
            beta,
            gamma,
            control: basis
                .include_control
                .then(|| raw[start + basis.income_degree]),
            rss,
            iters,
        }
    }
}

/// Fits `E[w_k^n | b] = exp(basis(b)·θ)` by Gauss–Newton with step halving,
/// started from OLS of `log(w^n + LOG_FLOOR)` on the rows with `w > 0`.
///
/// Converges when the relative decrease in RSS falls below 1e-10, when no
/// halved step decreases it, or when the fit is exact to rounding.
pub fn fit_moment_surface(
    ds: &Dataset,
    good: usize,
    order: usize,
    basis: &BasisSpec,
    fs: Option<&FirstStageFit>,
) -> Result<MomentFit> {
    basis.validate()?;
    if order == 0 {
        return Err(Error::Argument("moment order must be at least 1".into()));
    }
    if good >= ds.n_goods() {
        return Err(Error::Argument(format!(
            "good {good} not in a dataset of {} goods",
            ds.n_goods()
        )));
    }
    let n = ds.len();
    let controls: Vec<f64> = if basis.include_control {
        let fs =
            fs.ok_or_else(|| Error::Argument("the control basis needs a first-stage fit".into()))?;
        if fs.residuals.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: fs.residuals.len(),
            });
        }
        fs.residuals.clone()
    } else {
        vec![0.0; n]
    };

    let shares: Vec<f64> = ds.rows().iter().map(|r| r.shares[good]).collect();
    let positive = shares.iter().filter(|w| **w > 0.0).count();
    if positive == 0 {
        return Err(Error::DegenerateData(format!(
            "all shares of good {good} are zero"
        )));
    }
    if (positive as f64) < MIN_POSITIVE_FRACTION * n as f64 {
        return Err(Error::DegenerateData(format!(
            "only {positive} of {n} shares of good {good} are positive"
        )));
    }
    let target: Vec<f64> = shares.iter().map(|w| w.powi(order as i32)).collect();

    let rows: Vec<Vec<f64>> = ds
        .rows()
        .iter()
        .zip(&controls)
        .map(|(r, c)| basis.row(&r.log_prices, r.log_y, *c))
        .collect();
    let design = Design::new(&rows, &basis.labels(ds.goods()))?;

    let indicator: Vec<f64> = shares
        .iter()
        .map(|w| if *w > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let log_target: Vec<f64> = target
        .iter()
        .zip(&indicator)
        .map(|(t, i)| i * (t + LOG_FLOOR).ln())
        .collect();
    let mut coef = design.solve(Some(&indicator), &log_target)?;

    let scale: f64 = target.iter().map(|t| t * t).sum();
    let exact = f64::EPSILON * f64::EPSILON * scale;
    let evaluate = |c: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        let mu: Vec<f64> = design.predict(c).into_iter().map(f64::exp).collect();
        let r: Vec<f64> = target.iter().zip(&mu).map(|(t, m)| t - m).collect();
        let rss = r.iter().map(|v| v * v).sum();
        (mu, r, rss)
    };
    let done = |c: &[f64], rss: f64, iters: usize| {
        MomentFit::from_raw(
            good,
            order,
            basis,
            ds.n_goods(),
            &design.expand(c),
            rss,
            iters,
        )
    };
    let (mut mu, mut resid, mut rss) = evaluate(&coef);
    if !rss.is_finite() {
        return Err(Error::Numeric {
            message: "warm start overflowed".into(),
            achieved: rss,
        });
    }

    for iter in 1..=FIT_MAX_ITERATIONS {
        if rss <= exact {
            return Ok(done(&coef, rss, iter - 1));
        }
        let step = design.solve(Some(&mu), &resid)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = coef.iter().zip(&step).map(|(c, d)| c + t * d).collect();
            let eval = evaluate(&trial);
            if eval.2 < rss {
                accepted = Some((trial, eval));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, (m, r, new_rss))) = accepted else {
            return Ok(done(&coef, rss, iter));
        };
        let rel = (rss - new_rss) / rss;
        coef = trial;
        mu = m;
        resid = r;
        rss = new_rss;
        if rel < RSS_REL_TOL {
            return Ok(done(&coef, rss, iter));
        }
    }
    let grad: Vec<f64> = mu.iter().zip(&resid).map(|(m, r)| m * r).collect();
    let gradient_norm = design
        .raw_transpose_mul(&grad)
        .iter()
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    Err(Error::FitNonConvergence {
        iterations: FIT_MAX_ITERATIONS,
        gradient_norm,
        last_iterate: design.expand(&coef),
    })
}

/// Fits orders `1..=max_order` for each listed good, in parallel.
/// Output is ordered by good, then order.
pub fn fit_moment_surfaces(
    ds: &Dataset,
    goods: &[usize],
    max_order: usize,
    basis: &BasisSpec,
    fs: Option<&FirstStageFit>,
) -> Result<Vec<MomentFit>> {
    let jobs: Vec<(usize, usize)> = goods
        .iter()
        .flat_map(|&k| (1..=max_order).map(move |n| (k, n)))
        .collect();
    jobs.par_iter()
        .map(|&(k, n)| fit_moment_surface(ds, k, n, basis, fs))
        .collect()
}

/// Share moments of one good from consecutive-order fits, with analytic
/// log-derivatives. The control residual is held at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSurface {
    good: usize,
    goods: usize,
    fits: Vec<MomentFit>,
}

pub fn fitted_surface(fits: &[MomentFit], good: usize) -> Result<FittedSurface> {
    let mut own: Vec<MomentFit> = fits.iter().filter(|f| f.good == good).cloned().collect();
    own.sort_by_key(|f| f.order);
    if own.is_empty() {
        return Err(Error::MissingOrder(1));
    }
    for (i, f) in own.iter().enumerate() {
        if f.order != i + 1 {
            if f.order == i {
                return Err(Error::Argument(format!(
                    "duplicate fit of order {i} for good {good}"
                )));
            }
            return Err(Error::MissingOrder(i + 1));
        }
    }
    let goods = own[0].beta.len();
    if good >= goods {
        return Err(Error::Argument(format!(
            "good {good} not among the {goods} fitted prices"
        )));
    }
    let pd = own[0].beta[0].len();
    let id = own[0].gamma.len();
    for f in &own {
        if f.beta.len() != goods {
            return Err(Error::Shape {
                expected: goods,
                found: f.beta.len(),
            });
        }
        if let Some(b) = f.beta.iter().find(|b| b.len() != pd) {
            return Err(Error::Shape {
                expected: pd,
                found: b.len(),
            });
        }
        if f.gamma.len() != id {
            return Err(Error::Shape {
                expected: id,
                found: f.gamma.len(),
            });
        }
    }
    Ok(FittedSurface {
        good,
        goods,
        fits: own,
    })
}

/// `(Σ c_s x^s, Σ s c_s x^{s-1}, Σ s(s-1) c_s x^{s-2})` with `c` starting at `s = 1`.
fn poly(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for (i, a) in c.iter().enumerate() {
        let s = (i + 1) as f64;
        v += a * x.powi(i as i32 + 1);
        d1 += s * a * x.powi(i as i32);
        if i >= 1 {
            d2 += s * (s - 1.0) * a * x.powi(i as i32 - 1);
        }
    }
    (v, d1, d2)
}

struct Eval {
    w: f64,
    price: Vec<(f64, f64)>,
    income: (f64, f64),
}

impl FittedSurface {
    pub fn fits(&self) -> &[MomentFit] {
        &self.fits
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    /// Quantity-space view via the share-to-quantity chain rule.
    pub fn quantities(self) -> QuantitySurface<Self> {
        QuantitySurface::new(self)
    }

    fn eval(&self, n: usize, b: &Budget) -> Result<Eval> {
        if n == 0 {
            return Err(Error::Order {
                requested: 0,
                max: self.fits.len(),
            });
        }
        let f = self.fits.get(n - 1).ok_or(Error::MissingOrder(n))?;
        if b.dim() != self.goods {
            return Err(Error::Shape {
                expected: self.goods,
                found: b.dim(),
            });
        }
        let y = b.income();
        if !(y > 0.0 && b.prices().iter().all(|p| *p > 0.0)) {
            return Err(Error::Domain(
                "fitted surfaces need positive prices and income".into(),
            ));
        }
        let mut eta = f.alpha;
        let mut price = Vec::with_capacity(self.goods);
        for (beta, p) in f.beta.iter().zip(b.prices()) {
            let (v, d1, d2) = poly(beta, p.ln());
            eta += v;
            price.push((d1, d2));
        }
        let (v, d1, d2) = poly(&f.gamma, y.ln());
        eta += v;
        Ok(Eval {
            w: eta.exp(),
            price,
            income: (d1, d2),
        })
    }

    fn slope(e: &Eval, var: LogVar) -> Result<(f64, f64)> {
        match var {
            LogVar::Price(j) => e.price.get(j).copied().ok_or(Error::Shape {
                expected: e.price.len(),
                found: j + 1,
            }),
            LogVar::Income => Ok(e.income),
        }
    }
}

impl ShareSurface for FittedSurface {
    fn max_order(&self) -> usize {
        self.fits.len()
    }

    fn good(&self) -> usize {
        self.good
    }

    fn share_moment(&self, n: usize, b: &Budget) -> Result<f64> {
        Ok(self.eval(n, b)?.w)
    }

    fn d_log_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        let e = self.eval(n, b)?;
        Ok(e.w * Self::slope(&e, LogVar::Price(j))?.0)
    }

    fn d_log_income(&self, n: usize, b: &Budget) -> Result<f64> {
        let e = self.eval(n, b)?;
        Ok(e.w * e.income.0)
    }

    fn d2_log(&self, n: usize, b: &Budget, first: LogVar, second: LogVar) -> Option<Result<f64>> {
        Some(self.eval(n, b).and_then(|e| {
            let (g1, h1) = Self::slope(&e, first)?;
            let (g2, _) = Self::slope(&e, second)?;
            let own = if first == second { h1 } else { 0.0 };
            Ok(e.w * (g1 * g2 + own))
        }))
    }
}
