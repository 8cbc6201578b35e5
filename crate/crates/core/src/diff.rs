//! Central-difference partials with optional Richardson extrapolation.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::surface::{LogVar, MomentSurface, ShareSurface, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeScheme {
    pub mode: DerivativeMode,
    /// Relative step; the absolute step is `step * max(1, |x|)`.
    pub step: f64,
    pub richardson: bool,
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        Self {
            mode: DerivativeMode::Analytic,
            step: 1e-5,
            richardson: true,
        }
    }
}

impl DerivativeScheme {
    pub fn central() -> Self {
        Self {
            mode: DerivativeMode::CentralDifference,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 1e-12 && self.step < 1e-2) {
            return Err(Error::Argument(format!(
                "derivative step {} outside (1e-12, 1e-2)",
                self.step
            )));
        }
        Ok(())
    }
}

/// Differentiates `f` at `x` by central differences.
///
/// When `positive` is set the perturbed points must stay strictly positive.
pub fn central_difference<F>(
    mut f: F,
    x: f64,
    scheme: &DerivativeScheme,
    positive: bool,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    scheme.validate()?;
    let h = scheme.step * x.abs().max(1.0);
    if positive && x - h <= 0.0 {
        return Err(Error::Domain(format!(
            "central difference at {x} with step {h} leaves the positive domain"
        )));
    }
    let mut diff = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = diff(h)?;
    if !scheme.richardson {
        return Ok(coarse);
    }
    let fine = diff(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Numerical partial of `M_n` with respect to a price or income.
///
/// With [`DerivativeMode::Analytic`] the surface's own partial is returned.
pub fn numeric_partial<S: MomentSurface + ?Sized>(
    surface: &S,
    n: usize,
    b: &Budget,
    var: Var,
    scheme: &DerivativeScheme,
) -> Result<f64> {
    crate::surface::check_order(n, surface.max_order())?;
    if scheme.mode == DerivativeMode::Analytic {
        return surface.partial(n, b, var);
    }
    match var {
        Var::Price(j) => {
            b.check_good(j)?;
            central_difference(
                |p| surface.moment(n, &b.with_price(j, p)?),
                b.price(j),
                scheme,
                true,
            )
        }
        Var::Income => central_difference(
            |y| surface.moment(n, &b.with_income(y)?),
            b.income(),
            scheme,
            true,
        ),
    }
}

/// Shifts one log-coordinate of a budget by `delta`.
pub(crate) fn shift_log(b: &Budget, var: LogVar, delta: f64) -> Result<Budget> {
    match var {
        LogVar::Price(j) => {
            b.check_good(j)?;
            b.with_price(j, b.price(j) * delta.exp())
        }
        LogVar::Income => b.with_income(b.income() * delta.exp()),
    }
}

/// `d/d(second)` of the first log-partial `dW_n/d(first)`, analytic when the surface provides it.
pub fn second_log_partial<S: ShareSurface + ?Sized>(
    w: &S,
    n: usize,
    b: &Budget,
    first: LogVar,
    second: LogVar,
    scheme: &DerivativeScheme,
) -> Result<f64> {
    if let Some(v) = w.d2_log(n, b, first, second) {
        return v;
    }
    central_difference(
        |x| w.d_log(n, &shift_log(b, second, x)?, first),
        0.0,
        scheme,
        false,
    )
}
