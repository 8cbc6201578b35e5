//! Budgets and price changes.
//!
//! Two-good analyses use a single modeled price; the numeraire's price is
//! normalized to one and absorbed by the budget constraint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A price vector together with income.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    prices: Vec<f64>,
    income: f64,
}

impl Budget {
    pub fn new(prices: Vec<f64>, income: f64) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::Argument("a budget needs at least one price".into()));
        }
        if let Some(j) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Domain(format!(
                "price {j} must be strictly positive, got {}",
                prices[j]
            )));
        }
        if !(income.is_finite() && income > 0.0) {
            return Err(Error::Domain(format!(
                "income must be strictly positive, got {income}"
            )));
        }
        Ok(Self { prices, income })
    }

    /// Two-good budget with one modeled price.
    pub fn two_good(price: f64, income: f64) -> Result<Self> {
        Self::new(vec![price], income)
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn price(&self, good: usize) -> f64 {
        self.prices[good]
    }

    pub fn income(&self) -> f64 {
        self.income
    }

    pub fn dim(&self) -> usize {
        self.prices.len()
    }

    pub fn with_price(&self, good: usize, price: f64) -> Result<Self> {
        self.check_good(good)?;
        let mut prices = self.prices.clone();
        prices[good] = price;
        Self::new(prices, self.income)
    }

    pub fn with_prices(&self, prices: Vec<f64>) -> Result<Self> {
        if prices.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: prices.len(),
            });
        }
        Self::new(prices, self.income)
    }

    pub fn with_income(&self, income: f64) -> Result<Self> {
        Self::new(self.prices.clone(), income)
    }

    pub(crate) fn check_good(&self, good: usize) -> Result<()> {
        if good >= self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: good + 1,
            });
        }
        Ok(())
    }
}

/// An ordered pair of budgets at a common income.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceChange {
    from: Budget,
    to: Budget,
    delta: Vec<f64>,
}

impl PriceChange {
    pub fn new(from: Budget, to: Budget) -> Result<Self> {
        if from.dim() != to.dim() {
            return Err(Error::Shape {
                expected: from.dim(),
                found: to.dim(),
            });
        }
        if from.income() != to.income() {
            return Err(Error::Argument(format!(
                "price change must keep income fixed ({} vs {})",
                from.income(),
                to.income()
            )));
        }
        let delta = to
            .prices()
            .iter()
            .zip(from.prices())
            .map(|(p1, p0)| p1 - p0)
            .collect();
        Ok(Self { from, to, delta })
    }

    pub fn from_delta(from: Budget, delta: &[f64]) -> Result<Self> {
        if delta.len() != from.dim() {
            return Err(Error::Shape {
                expected: from.dim(),
                found: delta.len(),
            });
        }
        let prices = from
            .prices()
            .iter()
            .zip(delta)
            .map(|(p, d)| p + d)
            .collect();
        let to = from.with_prices(prices)?;
        Self::new(from, to)
    }

    /// Two-good price change `p0 -> p1` at income `y`.
    pub fn scalar(p0: f64, p1: f64, income: f64) -> Result<Self> {
        Self::new(Budget::two_good(p0, income)?, Budget::two_good(p1, income)?)
    }

    pub fn from_budget(&self) -> &Budget {
        &self.from
    }

    pub fn to_budget(&self) -> &Budget {
        &self.to
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn income(&self) -> f64 {
        self.from.income()
    }

    pub fn is_zero(&self) -> bool {
        self.delta.iter().all(|d| *d == 0.0)
    }

    /// The price change of `good`, requiring every other price to stay put.
    pub fn own_delta(&self, good: usize) -> Result<f64> {
        self.from.check_good(good)?;
        if let Some(j) = self
            .delta
            .iter()
            .enumerate()
            .position(|(j, d)| j != good && *d != 0.0)
        {
            return Err(Error::Argument(format!(
                "single-good formula for good {good} but price {j} also changes"
            )));
        }
        Ok(self.delta[good])
    }

    /// Prices on the linear path `p0 + t * delta`.
    pub fn prices_at(&self, t: f64) -> Vec<f64> {
        self.from
            .prices()
            .iter()
            .zip(&self.delta)
            .map(|(p, d)| p + t * d)
            .collect()
    }

    /// Budget on the linear price path at base income.
    pub fn budget_at(&self, t: f64) -> Result<Budget> {
        self.from
            .with_prices(self.prices_at(t))
            .map_err(|e| Error::PathDomain {
                t,
                message: e.to_string(),
            })
    }
}
