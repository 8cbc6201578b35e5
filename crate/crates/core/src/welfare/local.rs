use crate::budget::{Budget, PriceChange};
use crate::error::{Error, Result};
use crate::surface::{check_order, MomentSurface, ShareSurface};

/// Base budget and own-price change of a two-good analysis.
pub(crate) fn scalar_change<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
) -> Result<(Budget, f64)> {
    let dp = pc.own_delta(s.good())?;
    Ok((pc.from_budget().clone(), dp))
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("moment order must be at least 1".into()));
    }
    Ok(())
}

/// First-order approximation of the n-th moment of compensated demand after
/// the own price moves by `dp`:
/// `M_n + [(1/n) D_p M_n + (1/(n+1)) D_y M_{n+1}] Δp`.
pub fn compensated_moment_fo<S: MomentSurface + ?Sized>(
    s: &S,
    n: usize,
    b: &Budget,
    dp: f64,
) -> Result<f64> {
    check_n(n)?;
    check_order(n + 1, s.max_order())?;
    let nf = n as f64;
    let m = s.moment(n, b)?;
    if dp == 0.0 {
        return Ok(m);
    }
    Ok(m + (s.d_own_price(n, b)? / nf + s.d_income(n + 1, b)? / (nf + 1.0)) * dp)
}

/// Budget-share counterpart with base income in the denominator:
/// `W_n + [(1/n) D_logp W_n + (1/(n+1)) D_logy W_{n+1} + W_{n+1}] Δp/p0`.
pub fn compensated_share_moment<W: ShareSurface + ?Sized>(
    w: &W,
    n: usize,
    b: &Budget,
    dp: f64,
) -> Result<f64> {
    check_n(n)?;
    check_order(n + 1, w.max_order())?;
    let nf = n as f64;
    let wn = w.share_moment(n, b)?;
    if dp == 0.0 {
        return Ok(wn);
    }
    let rel = dp / b.price(w.good());
    let inner = w.d_log_price(n, b, w.good())? / nf
        + w.d_log_income(n + 1, b)? / (nf + 1.0)
        + w.share_moment(n + 1, b)?;
    Ok(wn + inner * rel)
}

/// Second-order approximation of `E[CV^n]`:
/// `Δp^n {M_n + (Δp/2)[D_p M_n + (n/(n+1)) D_y M_{n+1}]}` at the base budget.
pub fn cv_moment_local<S: MomentSurface + ?Sized>(
    s: &S,
    n: usize,
    pc: &PriceChange,
) -> Result<f64> {
    check_n(n)?;
    check_order(n + 1, s.max_order())?;
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let m = s.moment(n, &b)?;
    let slope = s.d_own_price(n, &b)? + nf / (nf + 1.0) * s.d_income(n + 1, &b)?;
    Ok(dp.powi(n as i32) * (m + 0.5 * dp * slope))
}

/// `Δp M1`.
pub fn cv_first_order<S: MomentSurface + ?Sized>(s: &S, pc: &PriceChange) -> Result<f64> {
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    Ok(dp * s.moment(1, &b)?)
}

/// Representative-agent approximation `Δp M1 + (Δp²/2)(D_p M1 + M1 D_y M1)`.
pub fn cv_ra<S: MomentSurface + ?Sized>(s: &S, pc: &PriceChange) -> Result<f64> {
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(0.0);
    }
    let m1 = s.moment(1, &b)?;
    Ok(dp * m1 + 0.5 * dp * dp * (s.d_own_price(1, &b)? + m1 * s.d_income(1, &b)?))
}
