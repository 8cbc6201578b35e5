use serde::{Deserialize, Serialize};

use super::local::scalar_change;
use crate::budget::{Budget, PriceChange};
use crate::diff::{second_log_partial, DerivativeScheme};
use crate::error::{Error, Result};
use crate::surface::{check_order, LogVar, MomentSurface, ShareSurface};

/// Four-way split of the second-order term of an approximation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    #[serde(rename = "A4")]
    pub a4: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2 + self.a3 + self.a4
    }
}

pub const IDENTITY_TOL: f64 = 1e-10;

fn check_identity(what: &str, got: f64, want: f64) -> Result<()> {
    let discrepancy = (got - want).abs();
    if !(discrepancy <= IDENTITY_TOL * want.abs().max(1.0)) {
        return Err(Error::InternalConsistency {
            what: what.into(),
            discrepancy,
        });
    }
    Ok(())
}

/// Splits `(Δp²/2)(D_p M1 + ½ D_y M2)` into a homothetic substitution part
/// (A1), a non-homothetic representative-agent part (A2), a heterogeneity
/// part under homotheticity (A3) and its non-homothetic adjustment (A4).
pub fn cv_decompose<S: MomentSurface + ?Sized>(s: &S, pc: &PriceChange) -> Result<Decomposition> {
    check_order(2, s.max_order())?;
    let (b, dp) = scalar_change(s, pc)?;
    if dp == 0.0 {
        return Ok(Decomposition::default());
    }
    let y = b.income();
    let h = 0.5 * dp * dp;
    let m1 = s.moment(1, &b)?;
    let m2 = s.moment(2, &b)?;
    let dpm1 = s.d_own_price(1, &b)?;
    let dym1 = s.d_income(1, &b)?;
    let dym2 = s.d_income(2, &b)?;
    let var = m2 - m1 * m1;
    let d = Decomposition {
        a1: h * (dpm1 + m1 * m1 / y),
        a2: h * m1 * (dym1 - m1 / y),
        a3: h * var / y,
        a4: h * (0.5 * (dym2 - 2.0 * m1 * dym1) - var / y),
    };
    check_identity("CV decomposition", d.total(), h * (dpm1 + 0.5 * dym2))?;
    Ok(d)
}

/// Second-order approximation of the proportional compensated expenditure
/// change, `(e(p1, v0) − y)/y`, after the log own price moves by `δ`:
/// `W1 δ + (δ²/2)[D_logp W1 + ½ D_logy W2 + W2]`.
pub fn price_index<W: ShareSurface + ?Sized>(w: &W, dlogp: f64, b: &Budget) -> Result<f64> {
    check_order(2, w.max_order())?;
    if dlogp == 0.0 {
        return Ok(0.0);
    }
    let k = w.good();
    let w1 = w.share_moment(1, b)?;
    let second = w.d_log_price(1, b, k)? + 0.5 * w.d_log_income(2, b)? + w.share_moment(2, b)?;
    Ok(w1 * dlogp + 0.5 * dlogp * dlogp * second)
}

/// Income sensitivity of the two halves of the price-index expansion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HomotheticityCorrection {
    /// `∂/∂log y` of `W1 δ + A1 + A2`.
    pub representative: f64,
    /// `∂/∂log y` of `A3 + A4`.
    pub heterogeneity: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceIndexDecomposition {
    #[serde(flatten)]
    pub terms: Decomposition,
    pub homotheticity_correction: HomotheticityCorrection,
}

/// Splits the second-order term of [`price_index`]:
/// `A1 = (δ²/2)(D_logp W1 + W1²)`, `A2 = (δ²/2) ½ D_logy(W1²)`,
/// `A3 = (δ²/2) Var(w)`, `A4 = (δ²/2) ½ D_logy Var(w)`.
pub fn price_index_decompose<W: ShareSurface + ?Sized>(
    w: &W,
    dlogp: f64,
    b: &Budget,
    scheme: &DerivativeScheme,
) -> Result<PriceIndexDecomposition> {
    check_order(2, w.max_order())?;
    if dlogp == 0.0 {
        return Ok(PriceIndexDecomposition::default());
    }
    let k = w.good();
    let h = 0.5 * dlogp * dlogp;
    let w1 = w.share_moment(1, b)?;
    let w2 = w.share_moment(2, b)?;
    let dlp1 = w.d_log_price(1, b, k)?;
    let dly1 = w.d_log_income(1, b)?;
    let dly2 = w.d_log_income(2, b)?;
    let terms = Decomposition {
        a1: h * (dlp1 + w1 * w1),
        a2: h * w1 * dly1,
        a3: h * (w2 - w1 * w1),
        a4: h * 0.5 * (dly2 - 2.0 * w1 * dly1),
    };
    let index = price_index(w, dlogp, b)?;
    check_identity(
        "price-index decomposition",
        terms.total(),
        index - w1 * dlogp,
    )?;

    let income = LogVar::Income;
    let d_dlp1 = second_log_partial(w, 1, b, LogVar::Price(k), income, scheme)?;
    let d_dly1 = second_log_partial(w, 1, b, income, income, scheme)?;
    let d_dly2 = second_log_partial(w, 2, b, income, income, scheme)?;
    let representative =
        dly1 * dlogp + h * (d_dlp1 + 2.0 * w1 * dly1) + h * (dly1 * dly1 + w1 * d_dly1);
    let heterogeneity =
        h * (dly2 - 2.0 * w1 * dly1) + h * 0.5 * (d_dly2 - 2.0 * (dly1 * dly1 + w1 * d_dly1));
    Ok(PriceIndexDecomposition {
        terms,
        homotheticity_correction: HomotheticityCorrection {
            representative,
            heterogeneity,
        },
    })
}

/// First-order welfare effect of perturbing a policy parameter that moves an
/// excise tax: `(D_p M1 + ½ D_y M2 − D_y M1) τ dτ/dθ`.
///
/// The modeled price is expected to equal `1 + τ`; this is not enforced.
pub fn tax_deadweight<S: MomentSurface + ?Sized>(
    s: &S,
    b: &Budget,
    tau: f64,
    dtau_dtheta: f64,
) -> Result<f64> {
    check_order(2, s.max_order())?;
    let scale = tau * dtau_dtheta;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((s.d_own_price(1, b)? + 0.5 * s.d_income(2, b)? - s.d_income(1, b)?) * scale)
}
