use serde::{Deserialize, Serialize};

use super::population::{check_dim, validate_probabilities, Branch, DemandClosure, Population};
use crate::budget::{Budget, PriceChange};
use crate::error::{Error, Result};

/// Cobb-Douglas type with expenditure `e(p, u) = u Π p_i^{α_i}`.
///
/// Shares `α` cover the priced goods; whatever they leave is spent on the
/// numeraire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CobbDouglasType {
    pub alpha: Vec<f64>,
}

impl CobbDouglasType {
    /// `Π p_i^{α_i}`.
    pub fn price_aggregate(&self, prices: &[f64]) -> f64 {
        prices
            .iter()
            .zip(&self.alpha)
            .map(|(p, a)| p.powf(*a))
            .product()
    }

    pub fn expenditure(&self, prices: &[f64], utility: f64) -> f64 {
        utility * self.price_aggregate(prices)
    }

    /// `y (Π (p1_i / p0_i)^{α_i} − 1)`.
    pub fn exact_cv(&self, pc: &PriceChange) -> Result<f64> {
        check_dim(pc.from_budget(), self.alpha.len())?;
        let from = self.price_aggregate(pc.from_budget().prices());
        let to = self.price_aggregate(pc.to_budget().prices());
        Ok(pc.income() * (to / from - 1.0))
    }
}

impl DemandClosure for CobbDouglasType {
    fn goods(&self) -> usize {
        self.alpha.len()
    }

    fn quantity(&self, good: usize, b: &Budget) -> Result<f64> {
        check_dim(b, self.alpha.len())?;
        b.check_good(good)?;
        Ok(self.alpha[good] * b.income() / b.price(good))
    }

    fn d_income(&self, good: usize, b: &Budget) -> Option<f64> {
        Some(self.alpha[good] / b.price(good))
    }

    fn d_price(&self, good: usize, b: &Budget, j: usize) -> Option<f64> {
        if j == good {
            Some(-self.alpha[good] * b.income() / (b.price(good) * b.price(good)))
        } else {
            Some(0.0)
        }
    }
}

/// Finite mixture of Cobb-Douglas types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CobbDouglasPopulation {
    types: Vec<(CobbDouglasType, f64)>,
}

impl CobbDouglasPopulation {
    pub fn new(types: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let first = types
            .first()
            .ok_or_else(|| Error::Argument("at least one type is required".into()))?;
        let dim = first.0.len();
        if dim == 0 {
            return Err(Error::Argument("share vectors must be nonempty".into()));
        }
        for (alpha, _) in &types {
            if alpha.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    found: alpha.len(),
                });
            }
            if alpha.iter().any(|a| !(*a >= 0.0)) || alpha.iter().sum::<f64>() > 1.0 + 1e-12 {
                return Err(Error::Argument(format!("invalid share vector {alpha:?}")));
            }
        }
        validate_probabilities(types.iter().map(|(_, p)| *p))?;
        Ok(Self {
            types: types
                .into_iter()
                .map(|(alpha, p)| (CobbDouglasType { alpha }, p))
                .collect(),
        })
    }

    /// Single type spending a share `α` on the modeled good.
    pub fn cd(alpha: f64) -> Result<Self> {
        Self::new(vec![(vec![alpha], 1.0)])
    }

    /// Two equally likely types with shares `(α, 1 − α)` and `(1 − α, α)` on two priced goods.
    pub fn cd2(alpha: f64) -> Result<Self> {
        Self::new(vec![
            (vec![alpha, 1.0 - alpha], 0.5),
            (vec![1.0 - alpha, alpha], 0.5),
        ])
    }

    /// The same types restricted to the first good, with the rest of the budget on the numeraire.
    pub fn leading_good(&self) -> Self {
        Self {
            types: self
                .types
                .iter()
                .map(|(t, p)| {
                    (
                        CobbDouglasType {
                            alpha: vec![t.alpha[0]],
                        },
                        *p,
                    )
                })
                .collect(),
        }
    }

    pub fn types(&self) -> &[(CobbDouglasType, f64)] {
        &self.types
    }

    /// Probability-weighted share vector.
    pub fn mean_alpha(&self) -> Vec<f64> {
        let dim = self.types[0].0.alpha.len();
        (0..dim)
            .map(|i| self.types.iter().map(|(t, p)| p * t.alpha[i]).sum())
            .collect()
    }
}

impl Population for CobbDouglasPopulation {
    type Agent = CobbDouglasType;

    fn name(&self) -> String {
        "cobb-douglas".into()
    }

    fn goods(&self) -> usize {
        self.types[0].0.alpha.len()
    }

    fn branches(&self) -> Vec<Branch> {
        self.types
            .iter()
            .map(|(_, p)| Branch {
                probability: *p,
                continuous: false,
            })
            .collect()
    }

    fn agent(&self, branch: usize, _u: f64) -> CobbDouglasType {
        self.types[branch].0.clone()
    }

    fn closed_form_moment(&self, good: usize, n: usize, b: &Budget) -> Option<Result<f64>> {
        Some((|| {
            check_dim(b, self.goods())?;
            b.check_good(good)?;
            let scale = b.income() / b.price(good);
            Ok(self
                .types
                .iter()
                .map(|(t, p)| p * (t.alpha[good] * scale).powi(n as i32))
                .sum())
        })())
    }

    fn support(&self, good: usize, b: &Budget) -> Result<(f64, f64)> {
        check_dim(b, self.goods())?;
        b.check_good(good)?;
        let scale = b.income() / b.price(good);
        let (lo, hi) = self
            .types
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(t, _)| t.alpha[good] * scale)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                (lo.min(q), hi.max(q))
            });
        Ok((lo, hi))
    }

    fn is_degenerate(&self) -> bool {
        let live: Vec<_> = self.types.iter().filter(|(_, p)| *p > 0.0).collect();
        live.windows(2).all(|w| w[0].0 == w[1].0)
    }
}

/// Aggregate expenditure `E_ω[e^ω(p, u)]` and the expenditure of the
/// representative agent whose shares are the population's mean shares.
///
/// Returns `(e_total, e_ra)`; for symmetric two-type populations
/// `e_ra ≤ e_total` by the AM-GM inequality.
pub fn aggregate_expenditure(
    pop: &CobbDouglasPopulation,
    prices: &[f64],
    utility: f64,
) -> Result<(f64, f64)> {
    if prices.len() != pop.goods() {
        return Err(Error::Shape {
            expected: pop.goods(),
            found: prices.len(),
        });
    }
    if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::Domain(format!(
            "price {p} must be strictly positive"
        )));
    }
    let total = pop
        .types
        .iter()
        .map(|(t, p)| p * t.expenditure(prices, utility))
        .sum();
    let ra = CobbDouglasType {
        alpha: pop.mean_alpha(),
    }
    .expenditure(prices, utility);
    Ok((total, ra))
}
