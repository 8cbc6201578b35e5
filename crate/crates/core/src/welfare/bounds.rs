use serde::{Deserialize, Serialize};

use super::local::scalar_change;
use crate::budget::{Budget, PriceChange};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::surface::MomentSurface;

/// Re-labels a domain failure at path position `t`.
pub(crate) fn on_path<T>(t: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain(message) => Error::PathDomain { t, message },
        other => other,
    })
}

/// Budget at position `t` of the price path, at income `y + s`.
fn path_budget(pc: &PriceChange, t: f64, s: f64) -> Result<Budget> {
    let b = pc.budget_at(t)?;
    if s == 0.0 {
        return Ok(b);
    }
    on_path(t, b.with_income(pc.income() + s))
}

/// Path-based approximation
/// `Δp ∫ M1(p(t), y) dt + (Δp²/2) ∫ D_y M2(p(t), y)(1 − t) dt`.
pub fn cv_path<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    quad: &QuadratureRule,
) -> Result<f64> {
    let (_, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let first = quad.integrate(|t| on_path(t, s.moment(1, &pc.budget_at(t)?)))?;
    let second =
        quad.integrate(|t| on_path(t, s.d_income(2, &pc.budget_at(t)?)).map(|v| v * (1.0 - t)))?;
    Ok(dp * first + 0.5 * dp * dp * second)
}

/// Local bound `Δp M1 + (Δp²/2)(D_p M1 + M1 B)` evaluated at both income-effect bounds.
///
/// Returns `(lower, upper)` ordered so that `lower ≤ upper`.
pub fn hn_bounds_local<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    b_lo: f64,
    b_hi: f64,
) -> Result<(f64, f64)> {
    if !(b_lo <= b_hi) {
        return Err(Error::Argument(format!(
            "income-effect bounds out of order: {b_lo} > {b_hi}"
        )));
    }
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok((0.0, 0.0));
    }
    let m1 = s.moment(1, &b)?;
    let dpm1 = s.d_own_price(1, &b)?;
    let bound = |bb: f64| dp * m1 + 0.5 * dp * dp * (dpm1 + m1 * bb);
    let (l, u) = (bound(b_lo), bound(b_hi));
    Ok((l.min(u), l.max(u)))
}

/// Path bound `Δp ∫ exp(B Δp (1 − t)) M1(p(t), y) dt` for a uniform income-effect bound `B`.
pub fn hn_bounds_path<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    bound: f64,
    quad: &QuadratureRule,
) -> Result<f64> {
    let (_, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let integral = quad.integrate(|t| {
        on_path(t, s.moment(1, &pc.budget_at(t)?)).map(|m| m * (bound * dp * (1.0 - t)).exp())
    })?;
    Ok(dp * integral)
}

/// Worst-case income-effect bounds for normal goods: `0 ≤ ∂q/∂y ≤ 1/p`.
pub fn default_income_effect_bounds(b: &Budget, good: usize) -> Result<(f64, f64)> {
    b.check_good(good)?;
    Ok((0.0, 1.0 / b.price(good)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevBounds {
    pub lower: f64,
    pub upper: f64,
    /// Upper bound on the share of types whose income effect exceeds `z`.
    pub pi_lower: f64,
    /// Lower bound on the share of types whose income effect exceeds `k`.
    pub pi_upper: f64,
    /// Range of the mean income effect over the path and compensation grid.
    pub mean_effect_range: (f64, f64),
    pub note: String,
}

/// Number of compensation levels in the `(t, s)` grid.
pub const CHEBYSHEV_S_LEVELS: usize = 8;

/// Tightens the worst-case path bounds using Markov-type probability bounds
/// on the mean income effect `E[B(t, s)] = D_y M1(p(t), y + s)`.
///
/// With `π_u = clip((sup E[B] − k)/B̄)` and `π_l = clip(inf E[B]/z)`:
/// `upper = π_u CV(B̄) + (1 − π_u) CV(k)` and
/// `lower = π_l CV(z) + (1 − π_l) CV(B̲)`, where `CV(·)` is [`hn_bounds_path`].
/// At `k = B̲` the event `B ≥ k` is certain and at `z = B̄` the event
/// `B ≥ z` is treated as null, which recovers the worst-case pair.
#[allow(clippy::too_many_arguments)]
pub fn chebyshev_bounds<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    b_lo: f64,
    b_hi: f64,
    z: f64,
    k: f64,
    quad: &QuadratureRule,
) -> Result<ChebyshevBounds> {
    if !(b_lo <= z && z <= b_hi && b_lo <= k && k <= b_hi) {
        return Err(Error::Argument(format!(
            "thresholds must satisfy {b_lo} ≤ z = {z}, k = {k} ≤ {b_hi}"
        )));
    }
    let (_, dp) = scalar_change(s, pc)?;
    if !(dp > 0.0) {
        return Err(Error::Argument(
            "probability-tightened bounds need a price increase".into(),
        ));
    }
    let worst_lo = hn_bounds_path(s, pc, b_lo, quad)?;
    let worst_hi = hn_bounds_path(s, pc, b_hi, quad)?;

    let mut ts = vec![0.0];
    ts.extend_from_slice(quad.nodes());
    ts.push(1.0);
    let s_max = worst_hi.max(0.0);
    let mut lo_e = f64::INFINITY;
    let mut hi_e = f64::NEG_INFINITY;
    for &t in &ts {
        for i in 0..CHEBYSHEV_S_LEVELS {
            let comp = s_max * i as f64 / (CHEBYSHEV_S_LEVELS - 1) as f64;
            let b = path_budget(pc, t, comp)?;
            let e = on_path(t, s.d_income(1, &b))?;
            lo_e = lo_e.min(e);
            hi_e = hi_e.max(e);
        }
    }

    let clip = |x: f64| x.clamp(0.0, 1.0);
    let pi_upper = if k <= b_lo {
        1.0
    } else if b_hi > 0.0 {
        clip((hi_e - k) / b_hi)
    } else {
        0.0
    };
    let pi_lower = if z >= b_hi {
        0.0
    } else if z > 0.0 {
        clip(lo_e / z)
    } else {
        1.0
    };

    let at_k = if pi_upper < 1.0 {
        hn_bounds_path(s, pc, k, quad)?
    } else {
        worst_hi
    };
    let at_z = if pi_lower > 0.0 {
        hn_bounds_path(s, pc, z, quad)?
    } else {
        worst_lo
    };
    let upper = pi_upper * worst_hi + (1.0 - pi_upper) * at_k;
    let lower = pi_lower * at_z + (1.0 - pi_lower) * worst_lo;
    let note = format!(
        "Pr[B >= {k}] >= {pi_upper:.6}; Pr[B >= {z}] <= {pi_lower:.6}; mean income effect in [{lo_e:.6}, {hi_e:.6}]"
    );
    Ok(ChebyshevBounds {
        lower,
        upper,
        pi_lower,
        pi_upper,
        mean_effect_range: (lo_e, hi_e),
        note,
    })
}
