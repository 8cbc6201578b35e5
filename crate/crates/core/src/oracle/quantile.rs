use serde::{Deserialize, Serialize};

use super::population::{check_dim, Branch, DemandClosure, Population};
use crate::budget::Budget;
use crate::error::Result;

/// One type of the quantile counterexample, indexed by `ω̃ ∈ [0, 1]`.
///
/// Low types (`ω̃ ≤ 1/2`) switch from slope 1/2 to 1/3 in income once
/// `y ≥ 6ω̃`; high types switch from 1/2 to 2/3 once `y ≥ 6(1 − ω̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileType {
    pub index: f64,
}

impl QuantileType {
    fn regime(&self, y: f64) -> (f64, f64) {
        let u = self.index;
        if u <= 0.5 {
            if y < 6.0 * u {
                (0.5, u)
            } else {
                (1.0 / 3.0, 2.0 * u)
            }
        } else if y < 6.0 * (1.0 - u) {
            (0.5, u)
        } else {
            (2.0 / 3.0, 2.0 * u - 1.0)
        }
    }
}

impl DemandClosure for QuantileType {
    fn goods(&self) -> usize {
        1
    }

    fn quantity(&self, good: usize, b: &Budget) -> Result<f64> {
        check_dim(b, 1)?;
        b.check_good(good)?;
        let (slope, level) = self.regime(b.income());
        Ok(-b.price(0) + slope * b.income() + level)
    }

    fn d_income(&self, _good: usize, b: &Budget) -> Option<f64> {
        Some(self.regime(b.income()).0)
    }

    fn d_price(&self, _good: usize, _b: &Budget, _j: usize) -> Option<f64> {
        Some(-1.0)
    }
}

/// A population observationally equivalent to the linear fixture for `y < 3`
/// whose income effects are distributed differently.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantileCounterexamplePopulation;

impl Population for QuantileCounterexamplePopulation {
    type Agent = QuantileType;

    fn name(&self) -> String {
        "quantile".into()
    }

    fn goods(&self) -> usize {
        1
    }

    fn branches(&self) -> Vec<Branch> {
        vec![Branch {
            probability: 1.0,
            continuous: true,
        }]
    }

    fn agent(&self, _branch: usize, u: f64) -> QuantileType {
        QuantileType { index: u }
    }

    fn breakpoints(&self, _branch: usize, b: &Budget) -> Vec<f64> {
        let y = b.income();
        vec![y / 6.0, 0.5, 1.0 - y / 6.0]
    }

    fn support(&self, good: usize, b: &Budget) -> Result<(f64, f64)> {
        check_dim(b, 1)?;
        b.check_good(good)?;
        let lo = QuantileType { index: 0.0 }.quantity(0, b)?;
        let hi = QuantileType { index: 1.0 }.quantity(0, b)?;
        let mid = QuantileType { index: 0.5 }.quantity(0, b)?;
        Ok((lo.min(mid), hi.max(mid)))
    }
}
