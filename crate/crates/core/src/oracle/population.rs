use rand::Rng;

use crate::budget::Budget;
use crate::diff::{central_difference, DerivativeScheme};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss_legendre, pairwise_sum};

/// Relative tolerance of quadrature over continuous type indices.
pub const TYPE_QUADRATURE_TOL: f64 = 1e-9;

/// Demand of a single consumer type.
pub trait DemandClosure: Send + Sync {
    /// Number of priced goods the closure is defined on.
    fn goods(&self) -> usize;

    fn quantity(&self, good: usize, b: &Budget) -> Result<f64>;

    /// Analytic `∂q_good/∂y`, if known.
    fn d_income(&self, _good: usize, _b: &Budget) -> Option<f64> {
        None
    }

    /// Analytic `∂q_good/∂p_j`, if known.
    fn d_price(&self, _good: usize, _b: &Budget, _j: usize) -> Option<f64> {
        None
    }
}

pub(crate) fn check_dim(b: &Budget, goods: usize) -> Result<()> {
    if b.dim() != goods {
        return Err(Error::Shape {
            expected: goods,
            found: b.dim(),
        });
    }
    Ok(())
}

/// `∂q/∂y` of one type, analytic when available.
pub fn type_d_income<D: DemandClosure + ?Sized>(d: &D, good: usize, b: &Budget) -> Result<f64> {
    match d.d_income(good, b) {
        Some(v) => Ok(v),
        None => central_difference(
            |y| d.quantity(good, &b.with_income(y)?),
            b.income(),
            &DerivativeScheme::central(),
            true,
        ),
    }
}

/// `∂q/∂p_j` of one type, analytic when available.
pub fn type_d_price<D: DemandClosure + ?Sized>(
    d: &D,
    good: usize,
    b: &Budget,
    j: usize,
) -> Result<f64> {
    b.check_good(j)?;
    match d.d_price(good, b, j) {
        Some(v) => Ok(v),
        None => central_difference(
            |p| d.quantity(good, &b.with_price(j, p)?),
            b.price(j),
            &DerivativeScheme::central(),
            true,
        ),
    }
}

/// One mixture component of a population.
///
/// A continuous branch carries a type index uniformly distributed on `[0, 1]`;
/// a discrete branch is a single type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub continuous: bool,
}

/// A heterogeneous population of demand types.
pub trait Population: Send + Sync {
    type Agent: DemandClosure;

    fn name(&self) -> String;

    fn goods(&self) -> usize;

    fn branches(&self) -> Vec<Branch>;

    /// The type at index `u ∈ [0, 1]` of `branch`; `u` is ignored for discrete branches.
    fn agent(&self, branch: usize, u: f64) -> Self::Agent;

    /// Kinks of the integrand in `u` at budget `b`.
    fn breakpoints(&self, _branch: usize, _b: &Budget) -> Vec<f64> {
        Vec::new()
    }

    /// `M_n(b)` for good `good` in closed form, if available.
    fn closed_form_moment(&self, _good: usize, _n: usize, _b: &Budget) -> Option<Result<f64>> {
        None
    }

    /// Smallest interval containing the demand for `good` at `b`.
    fn support(&self, good: usize, b: &Budget) -> Result<(f64, f64)>;

    /// True when every type is identical.
    fn is_degenerate(&self) -> bool {
        let branches = self.branches();
        branches.iter().filter(|br| br.probability > 0.0).count() <= 1
            && branches.iter().all(|br| !br.continuous)
    }
}

/// `E[g(type)]` over the population.
pub fn expectation<P, F>(pop: &P, b: &Budget, mut g: F) -> Result<f64>
where
    P: Population + ?Sized,
    F: FnMut(&P::Agent) -> Result<f64>,
{
    let mut parts = Vec::new();
    for (i, br) in pop.branches().iter().enumerate() {
        if br.probability == 0.0 {
            continue;
        }
        let v = if br.continuous {
            adaptive_gauss_legendre(
                |u| g(&pop.agent(i, u)),
                0.0,
                1.0,
                &pop.breakpoints(i, b),
                TYPE_QUADRATURE_TOL,
            )?
        } else {
            g(&pop.agent(i, 0.5))?
        };
        parts.push(br.probability * v);
    }
    Ok(pairwise_sum(&parts))
}

/// Draws one type according to the population's mixing distribution.
pub fn draw_agent<P: Population + ?Sized, R: Rng + ?Sized>(pop: &P, rng: &mut R) -> P::Agent {
    let branches = pop.branches();
    let pick: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = branches.len() - 1;
    for (i, br) in branches.iter().enumerate() {
        acc += br.probability;
        if pick < acc {
            chosen = i;
            break;
        }
    }
    let u = if branches[chosen].continuous {
        rng.random()
    } else {
        0.5
    };
    pop.agent(chosen, u)
}

pub(crate) fn validate_probabilities(probs: impl IntoIterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in probs {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Argument(format!("probability {p} is not in [0, 1]")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}
