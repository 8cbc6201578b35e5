use serde::{Deserialize, Serialize};

use super::cobb_douglas::{CobbDouglasPopulation, CobbDouglasType};
use super::linear::{LinearHeteroPopulation, LinearType};
use super::population::{Branch, DemandClosure, Population};
use super::quantile::{QuantileCounterexamplePopulation, QuantileType};
use crate::budget::Budget;
use crate::error::{Error, Result};

/// A named fixture population chosen at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnyPopulation {
    Linear(LinearHeteroPopulation),
    Quantile(QuantileCounterexamplePopulation),
    CobbDouglas(CobbDouglasPopulation),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyAgent {
    Linear(LinearType),
    Quantile(QuantileType),
    CobbDouglas(CobbDouglasType),
}

fn parse_alpha(arg: Option<&str>, default: f64) -> Result<f64> {
    match arg {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Argument(format!("invalid share parameter `{s}`"))),
    }
}

impl AnyPopulation {
    /// Parses `L0`, `Q0`, `CD`, `CD(α)`, `CD2` or `CD2(α)`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, arg) = match name.find('(') {
            Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
            Some(_) => {
                return Err(Error::Argument(format!(
                    "malformed population name `{name}`"
                )))
            }
            None => (name, None),
        };
        match (head.to_ascii_uppercase().as_str(), arg) {
            ("L0", None) => Ok(Self::Linear(LinearHeteroPopulation::l0())),
            ("Q0", None) => Ok(Self::Quantile(QuantileCounterexamplePopulation)),
            ("CD", a) => Ok(Self::CobbDouglas(CobbDouglasPopulation::cd(parse_alpha(
                a, 0.5,
            )?)?)),
            ("CD2", a) => Ok(Self::CobbDouglas(CobbDouglasPopulation::cd2(parse_alpha(
                a, 0.3,
            )?)?)),
            _ => Err(Error::Argument(format!("unknown population `{name}`"))),
        }
    }

    /// The population restricted to one priced good and the numeraire.
    pub fn two_good(&self) -> Self {
        match self {
            Self::CobbDouglas(p) => Self::CobbDouglas(p.leading_good()),
            other => other.clone(),
        }
    }

    /// Bounds on individual income effects, when known exactly.
    pub fn income_effect_range(&self, b: &Budget) -> Option<(f64, f64)> {
        match self {
            Self::Linear(p) => Some(p.income_effect_range()),
            Self::Quantile(_) => Some((1.0 / 3.0, 2.0 / 3.0)),
            Self::CobbDouglas(p) => {
                let price = b.price(0);
                p.types()
                    .iter()
                    .filter(|(_, w)| *w > 0.0)
                    .map(|(t, _)| t.alpha[0] / price)
                    .fold(None, |acc: Option<(f64, f64)>, a| match acc {
                        None => Some((a, a)),
                        Some((lo, hi)) => Some((lo.min(a), hi.max(a))),
                    })
            }
        }
    }
}

impl DemandClosure for AnyAgent {
    fn goods(&self) -> usize {
        match self {
            Self::Linear(a) => a.goods(),
            Self::Quantile(a) => a.goods(),
            Self::CobbDouglas(a) => a.goods(),
        }
    }

    fn quantity(&self, good: usize, b: &Budget) -> Result<f64> {
        match self {
            Self::Linear(a) => a.quantity(good, b),
            Self::Quantile(a) => a.quantity(good, b),
            Self::CobbDouglas(a) => a.quantity(good, b),
        }
    }

    fn d_income(&self, good: usize, b: &Budget) -> Option<f64> {
        match self {
            Self::Linear(a) => a.d_income(good, b),
            Self::Quantile(a) => a.d_income(good, b),
            Self::CobbDouglas(a) => a.d_income(good, b),
        }
    }

    fn d_price(&self, good: usize, b: &Budget, j: usize) -> Option<f64> {
        match self {
            Self::Linear(a) => a.d_price(good, b, j),
            Self::Quantile(a) => a.d_price(good, b, j),
            Self::CobbDouglas(a) => a.d_price(good, b, j),
        }
    }
}

impl Population for AnyPopulation {
    type Agent = AnyAgent;

    fn name(&self) -> String {
        match self {
            Self::Linear(p) => p.name(),
            Self::Quantile(p) => p.name(),
            Self::CobbDouglas(p) => p.name(),
        }
    }

    fn goods(&self) -> usize {
        match self {
            Self::Linear(p) => p.goods(),
            Self::Quantile(p) => p.goods(),
            Self::CobbDouglas(p) => p.goods(),
        }
    }

    fn branches(&self) -> Vec<Branch> {
        match self {
            Self::Linear(p) => p.branches(),
            Self::Quantile(p) => p.branches(),
            Self::CobbDouglas(p) => p.branches(),
        }
    }

    fn agent(&self, branch: usize, u: f64) -> AnyAgent {
        match self {
            Self::Linear(p) => AnyAgent::Linear(p.agent(branch, u)),
            Self::Quantile(p) => AnyAgent::Quantile(p.agent(branch, u)),
            Self::CobbDouglas(p) => AnyAgent::CobbDouglas(p.agent(branch, u)),
        }
    }

    fn breakpoints(&self, branch: usize, b: &Budget) -> Vec<f64> {
        match self {
            Self::Linear(p) => p.breakpoints(branch, b),
            Self::Quantile(p) => p.breakpoints(branch, b),
            Self::CobbDouglas(p) => p.breakpoints(branch, b),
        }
    }

    fn closed_form_moment(&self, good: usize, n: usize, b: &Budget) -> Option<Result<f64>> {
        match self {
            Self::Linear(p) => p.closed_form_moment(good, n, b),
            Self::Quantile(p) => p.closed_form_moment(good, n, b),
            Self::CobbDouglas(p) => p.closed_form_moment(good, n, b),
        }
    }

    fn support(&self, good: usize, b: &Budget) -> Result<(f64, f64)> {
        match self {
            Self::Linear(p) => p.support(good, b),
            Self::Quantile(p) => p.support(good, b),
            Self::CobbDouglas(p) => p.support(good, b),
        }
    }

    fn is_degenerate(&self) -> bool {
        match self {
            Self::Linear(p) => p.is_degenerate(),
            Self::Quantile(p) => p.is_degenerate(),
            Self::CobbDouglas(p) => p.is_degenerate(),
        }
    }
}
