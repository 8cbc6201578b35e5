use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::population::{check_dim, DemandClosure, Population};
use crate::budget::PriceChange;
use crate::error::{Error, Result};
use crate::ode::{rk4, OdeConfig};
use crate::quadrature::{adaptive_gauss_legendre, pairwise_sum, QuadratureRule};

/// Exact compensating variation of one type.
///
/// Solves `ds/dt = q(p(t), y + s) · Δp` with `s(0) = 0` along the linear
/// price path and returns `s(1)`.
pub fn exact_cv_type<D: DemandClosure + ?Sized>(
    demand: &D,
    pc: &PriceChange,
    cfg: &OdeConfig,
) -> Result<f64> {
    check_dim(pc.from_budget(), demand.goods())?;
    if pc.is_zero() {
        return Ok(0.0);
    }
    let y = pc.income();
    let delta = pc.delta().to_vec();
    rk4(
        |t, s| {
            let income = y + s;
            if !(income > 0.0) {
                return Err(Error::DomainExit { t });
            }
            let b = pc.budget_at(t)?.with_income(income)?;
            let mut terms = Vec::with_capacity(delta.len());
            for (j, d) in delta.iter().enumerate() {
                terms.push(demand.quantity(j, &b)? * d);
            }
            Ok(terms.iter().sum())
        },
        0.0,
        cfg,
    )
}

/// Closed form of the two-good CV when the income effect is a constant `a`:
/// `Δp ∫_0^1 q(p(τ), y) exp(a Δp (1 − τ)) dτ`.
pub fn exact_cv_constant_income_effect<D: DemandClosure + ?Sized>(
    demand: &D,
    a: f64,
    pc: &PriceChange,
) -> Result<f64> {
    check_dim(pc.from_budget(), 1)?;
    let dp = pc.own_delta(0)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let integral = adaptive_gauss_legendre(
        |t| Ok(demand.quantity(0, &pc.budget_at(t)?)? * (a * dp * (1.0 - t)).exp()),
        0.0,
        1.0,
        &[],
        1e-13,
    )?;
    Ok(dp * integral)
}

/// Moments of the population distribution of compensating variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvDistribution {
    pub mean: f64,
    pub variance: f64,
    /// `E[CV^n]` for `n = 1..=4`.
    pub raw_moments: Vec<f64>,
}

/// Nodes per smooth segment of a continuous type index.
pub const CV_NODES_PER_SEGMENT: usize = 64;

/// Exact CV distribution by tensor-product quadrature over types.
///
/// Continuous type indices use a 64-node Gauss-Legendre rule on each segment
/// between the population's breakpoints at the base budget; discrete types
/// are enumerated. Per-type ODE solves run in parallel and are reduced by
/// pairwise summation, so the result does not depend on the schedule.
pub fn population_cv<P: Population + ?Sized>(
    pop: &P,
    pc: &PriceChange,
    cfg: &OdeConfig,
) -> Result<CvDistribution> {
    cfg.validate()?;
    let rule = QuadratureRule::gauss_legendre(CV_NODES_PER_SEGMENT)?;
    let mut points: Vec<(usize, f64, f64)> = Vec::new();
    for (i, br) in pop.branches().iter().enumerate() {
        if br.probability == 0.0 {
            continue;
        }
        if !br.continuous {
            points.push((i, 0.5, br.probability));
            continue;
        }
        let mut edges = vec![0.0];
        let mut cuts: Vec<f64> = pop
            .breakpoints(i, pc.from_budget())
            .into_iter()
            .filter(|x| *x > 0.0 && *x < 1.0)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        edges.extend(cuts);
        edges.push(1.0);
        for w in edges.windows(2) {
            let len = w[1] - w[0];
            for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
                points.push((i, w[0] + len * x, br.probability * len * wt));
            }
        }
    }
    let cvs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|(i, u, w)| exact_cv_type(&pop.agent(*i, *u), pc, cfg).map(|cv| (cv, *w)))
        .collect::<Result<_>>()?;

    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        let terms: Vec<f64> = cvs.iter().map(|(cv, w)| w * f(*cv)).collect();
        pairwise_sum(&terms)
    };
    let raw_moments: Vec<f64> = (1..=4).map(|n| weighted(&|cv| cv.powi(n))).collect();
    let mean = raw_moments[0];
    let variance = weighted(&|cv| (cv - mean) * (cv - mean));
    Ok(CvDistribution {
        mean,
        variance,
        raw_moments,
    })
}
