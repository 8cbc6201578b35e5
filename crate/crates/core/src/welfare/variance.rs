use serde::{Deserialize, Serialize};

use super::local::scalar_change;
use crate::budget::PriceChange;
use crate::error::Result;
use crate::surface::{check_order, MomentSurface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    /// Uses the second and third moments of demand.
    Robust,
    /// Valid when income effects do not vary across types.
    AdditiveSeparable,
    /// `Δp² (M2 − M1²)`.
    FirstOrder,
}

/// Approximate variance of compensating variation across the population.
pub fn cv_variance<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    kind: VarianceKind,
) -> Result<f64> {
    if kind == VarianceKind::Robust {
        check_order(3, s.max_order())?;
    } else {
        check_order(2, s.max_order())?;
    }
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let m1 = s.moment(1, &b)?;
    let m2 = s.moment(2, &b)?;
    let dp2 = dp * dp;
    match kind {
        VarianceKind::FirstOrder => Ok(dp2 * (m2 - m1 * m1)),
        VarianceKind::Robust => {
            let second = m2 + 0.5 * dp * (s.d_own_price(2, &b)? + 2.0 / 3.0 * s.d_income(3, &b)?);
            let first = m1 + 0.5 * dp * (s.d_own_price(1, &b)? + 0.5 * s.d_income(2, &b)?);
            Ok(dp2 * (second - first * first))
        }
        VarianceKind::AdditiveSeparable => {
            let dpm1 = s.d_own_price(1, &b)?;
            let dym1 = s.d_income(1, &b)?;
            let second = m2 + dp * (m1 * dpm1 + m2 * dym1);
            let first = m1 + 0.5 * dp * (dpm1 + m1 * dym1);
            Ok(dp2 * (second - first * first))
        }
    }
}
