use serde::{Deserialize, Serialize};

use super::population::{check_dim, validate_probabilities, Branch, DemandClosure, Population};
use crate::budget::Budget;
use crate::error::{Error, Result};

/// `q = ω1 − β p + ω2 y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearType {
    pub intercept: f64,
    pub price_slope: f64,
    pub income_effect: f64,
}

impl DemandClosure for LinearType {
    fn goods(&self) -> usize {
        1
    }

    fn quantity(&self, good: usize, b: &Budget) -> Result<f64> {
        check_dim(b, 1)?;
        b.check_good(good)?;
        Ok(self.intercept - self.price_slope * b.price(0) + self.income_effect * b.income())
    }

    fn d_income(&self, _good: usize, _b: &Budget) -> Option<f64> {
        Some(self.income_effect)
    }

    fn d_price(&self, _good: usize, _b: &Budget, _j: usize) -> Option<f64> {
        Some(-self.price_slope)
    }
}

/// Linear demand with a uniform intercept and a discrete income effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHeteroPopulation {
    intercept_low: f64,
    intercept_high: f64,
    price_slope: f64,
    /// `(ω2, probability)` pairs.
    income_effects: Vec<(f64, f64)>,
}

impl LinearHeteroPopulation {
    pub fn new(
        intercept_low: f64,
        intercept_high: f64,
        price_slope: f64,
        income_effects: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(intercept_low <= intercept_high) {
            return Err(Error::Argument(format!(
                "intercept range [{intercept_low}, {intercept_high}] is empty"
            )));
        }
        if income_effects.is_empty() {
            return Err(Error::Argument(
                "at least one income effect is required".into(),
            ));
        }
        validate_probabilities(income_effects.iter().map(|(_, p)| *p))?;
        Ok(Self {
            intercept_low,
            intercept_high,
            price_slope,
            income_effects,
        })
    }

    /// `ω1 ~ U(0, 1)`, `ω2 ∈ {1/3, 2/3}` with equal probability.
    pub fn l0() -> Self {
        Self::new(0.0, 1.0, 1.0, vec![(1.0 / 3.0, 0.5), (2.0 / 3.0, 0.5)]).expect("valid fixture")
    }

    /// Reference budget `p = 1, y = 2`.
    pub fn reference_budget() -> Budget {
        Budget::two_good(1.0, 2.0).expect("valid budget")
    }

    pub fn income_effects(&self) -> &[(f64, f64)] {
        &self.income_effects
    }

    pub fn intercept_range(&self) -> (f64, f64) {
        (self.intercept_low, self.intercept_high)
    }

    pub fn price_slope(&self) -> f64 {
        self.price_slope
    }

    /// Smallest and largest income effect with positive probability.
    pub fn income_effect_range(&self) -> (f64, f64) {
        let live = self
            .income_effects
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(a, _)| *a);
        live.clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                (lo.min(a), hi.max(a))
            })
    }

    fn continuous(&self) -> bool {
        self.intercept_high > self.intercept_low
    }
}

/// `E[(U + c)^n]` for `U ~ U(lo, hi)`.
fn uniform_shift_moment(lo: f64, hi: f64, c: f64, n: usize) -> f64 {
    if hi == lo {
        return (lo + c).powi(n as i32);
    }
    let k = n as i32 + 1;
    ((hi + c).powi(k) - (lo + c).powi(k)) / (k as f64 * (hi - lo))
}

impl Population for LinearHeteroPopulation {
    type Agent = LinearType;

    fn name(&self) -> String {
        "linear".into()
    }

    fn goods(&self) -> usize {
        1
    }

    fn branches(&self) -> Vec<Branch> {
        let continuous = self.continuous();
        self.income_effects
            .iter()
            .map(|(_, p)| Branch {
                probability: *p,
                continuous,
            })
            .collect()
    }

    fn agent(&self, branch: usize, u: f64) -> LinearType {
        LinearType {
            intercept: self.intercept_low + u * (self.intercept_high - self.intercept_low),
            price_slope: self.price_slope,
            income_effect: self.income_effects[branch].0,
        }
    }

    fn closed_form_moment(&self, good: usize, n: usize, b: &Budget) -> Option<Result<f64>> {
        Some((|| {
            check_dim(b, 1)?;
            b.check_good(good)?;
            let sum = self
                .income_effects
                .iter()
                .map(|(a, prob)| {
                    let c = -self.price_slope * b.price(0) + a * b.income();
                    prob * uniform_shift_moment(self.intercept_low, self.intercept_high, c, n)
                })
                .sum();
            Ok(sum)
        })())
    }

    fn support(&self, good: usize, b: &Budget) -> Result<(f64, f64)> {
        check_dim(b, 1)?;
        b.check_good(good)?;
        let (lo, hi) = self.income_effect_range();
        let base = -self.price_slope * b.price(0);
        let y = b.income();
        Ok((
            self.intercept_low + base + lo * y,
            self.intercept_high + base + hi * y,
        ))
    }

    fn is_degenerate(&self) -> bool {
        !self.continuous() && self.income_effects.iter().filter(|(_, p)| *p > 0.0).count() <= 1
    }
}
