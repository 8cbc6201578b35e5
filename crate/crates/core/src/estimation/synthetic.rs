//! Synthetic cross-sections with a known exp-polynomial share surface.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{fitted_surface, Dataset, FittedSurface, Household, MomentFit};
use crate::error::{Error, Result};

/// One-good design:
/// `log y = δ0 + δ1 log z + δ2 log p + v`, `v ~ U(−shock, shock)`, and
/// `w = exp(α + Σ β_s (log p)^s + Σ γ_s (log y)^s + λ v)·(1 + u)`,
/// `u ~ U(−noise, noise)`. Log prices and log instruments are uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyDgp {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `λ`; zero makes expenditure exogenous.
    pub endogeneity: f64,
    pub noise: f64,
    pub shock: f64,
    pub first_stage: [f64; 3],
    pub log_p_range: (f64, f64),
    pub log_z_range: (f64, f64),
}

impl ExpPolyDgp {
    pub const GOOD: &'static str = "good";

    fn index(&self, lp: f64, ly: f64) -> f64 {
        let poly = |c: &[f64], x: f64| {
            c.iter()
                .enumerate()
                .map(|(i, a)| a * x.powi(i as i32 + 1))
                .sum::<f64>()
        };
        self.alpha + poly(&self.beta, lp) + poly(&self.gamma, ly)
    }

    /// `E[(1 + u)^n]`.
    pub fn noise_moment(&self, n: usize) -> f64 {
        let a = self.noise;
        if a == 0.0 {
            return 1.0;
        }
        let k = n as i32 + 1;
        ((1.0 + a).powi(k) - (1.0 - a).powi(k)) / (2.0 * a * k as f64)
    }

    pub fn simulate(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let [d0, d1, d2] = self.first_stage;
        let draw = |rng: &mut ChaCha20Rng, (lo, hi): (f64, f64), h: f64| {
            let u: f64 = rng.random();
            if h == 0.0 {
                lo + (hi - lo) * u
            } else {
                h * (2.0 * u - 1.0)
            }
        };
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let lp = draw(&mut rng, self.log_p_range, 0.0);
            let lz = draw(&mut rng, self.log_z_range, 0.0);
            let v = draw(&mut rng, (0.0, 0.0), self.shock);
            let u = draw(&mut rng, (0.0, 0.0), self.noise);
            let ly = d0 + d1 * lz + d2 * lp + v;
            let w = (self.index(lp, ly) + self.endogeneity * v).exp() * (1.0 + u);
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Argument(format!(
                    "draw {i} has share {w} outside [0, 1]"
                )));
            }
            rows.push(Household {
                shares: vec![w],
                log_prices: vec![lp],
                log_y: ly,
                log_z: lz,
            });
        }
        Dataset::new(vec![Self::GOOD.into()], rows)
    }

    /// Coefficients of `E[w^n | b, v = 0]`.
    pub fn planted_fit(&self, order: usize) -> MomentFit {
        let n = order as f64;
        MomentFit {
            good: 0,
            order,
            alpha: n * self.alpha + self.noise_moment(order).ln(),
            beta: vec![self.beta.iter().map(|b| n * b).collect()],
            gamma: self.gamma.iter().map(|g| n * g).collect(),
            control: Some(n * self.endogeneity),
            rss: 0.0,
            iters: 0,
        }
    }

    /// The planted share surface for orders `1..=max_order`, at `v = 0`.
    pub fn truth(&self, max_order: usize) -> Result<FittedSurface> {
        let fits: Vec<MomentFit> = (1..=max_order).map(|n| self.planted_fit(n)).collect();
        fitted_surface(&fits, 0)
    }
}
