use serde::{Deserialize, Serialize};

use super::bounds::{chebyshev_bounds, cv_path, default_income_effect_bounds, hn_bounds_path};
use super::decompose::{cv_decompose, Decomposition};
use super::local::{cv_first_order, cv_moment_local, cv_ra, scalar_change};
use super::variance::{cv_variance, VarianceKind};
use crate::budget::PriceChange;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::surface::MomentSurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsKind {
    WorstCase,
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundsKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Absent when the surface has fewer than three moments.
    pub robust: Option<f64>,
    pub additive: f64,
    pub first_order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceChangeSummary {
    pub p0: f64,
    pub p1: f64,
    pub income: f64,
    pub dp: f64,
}

/// All welfare estimates for one price change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub price_change: PriceChangeSummary,
    pub first_order: f64,
    pub ra: f64,
    pub robust: f64,
    pub path: f64,
    pub bounds: BoundsReport,
    pub variance: VarianceReport,
    pub decomposition: Decomposition,
    /// Approximate `E[CV^n]` for `n = 1..max_order − 1`.
    pub moments: Vec<f64>,
}

/// Income-effect bounds and optional probability thresholds `(z, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub thresholds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Defaults to `[0, 1/p]`.
    pub bounds: Option<BoundsSpec>,
    pub quadrature: QuadratureRule,
}

/// Assembles a [`WelfareReport`] for a two-good price change.
///
/// Probability-tightened bounds are used when thresholds are configured and
/// the price rises; otherwise the worst-case path bounds are reported.
pub fn welfare_report<S: MomentSurface + ?Sized>(
    s: &S,
    pc: &PriceChange,
    opts: &ReportOptions,
) -> Result<WelfareReport> {
    if s.max_order() < 2 {
        return Err(Error::Order {
            requested: 2,
            max: s.max_order(),
        });
    }
    let (b, dp) = scalar_change(s, pc)?;
    let good = s.good();
    let spec = match opts.bounds {
        Some(spec) => spec,
        None => {
            let (lower, upper) = default_income_effect_bounds(&b, good)?;
            BoundsSpec {
                lower,
                upper,
                thresholds: None,
            }
        }
    };
    let quad = &opts.quadrature;
    let bounds = match spec.thresholds {
        Some((z, k)) if dp > 0.0 => {
            let c = chebyshev_bounds(s, pc, spec.lower, spec.upper, z, k, quad)?;
            BoundsReport {
                lower: c.lower,
                upper: c.upper,
                kind: BoundsKind::Chebyshev,
                note: Some(c.note),
            }
        }
        _ => {
            let a = hn_bounds_path(s, pc, spec.lower, quad)?;
            let c = hn_bounds_path(s, pc, spec.upper, quad)?;
            BoundsReport {
                lower: a.min(c),
                upper: a.max(c),
                kind: BoundsKind::WorstCase,
                note: None,
            }
        }
    };
    let variance = VarianceReport {
        robust: if s.max_order() >= 3 {
            Some(cv_variance(s, pc, VarianceKind::Robust)?)
        } else {
            None
        },
        additive: cv_variance(s, pc, VarianceKind::AdditiveSeparable)?,
        first_order: cv_variance(s, pc, VarianceKind::FirstOrder)?,
    };
    let moments = (1..s.max_order())
        .map(|n| cv_moment_local(s, n, pc))
        .collect::<Result<_>>()?;
    Ok(WelfareReport {
        price_change: PriceChangeSummary {
            p0: b.price(good),
            p1: pc.to_budget().price(good),
            income: b.income(),
            dp,
        },
        first_order: cv_first_order(s, pc)?,
        ra: cv_ra(s, pc)?,
        robust: cv_moment_local(s, 1, pc)?,
        path: cv_path(s, pc, quad)?,
        bounds,
        variance,
        decomposition: cv_decompose(s, pc)?,
        moments,
    })
}

impl WelfareReport {
    pub const CSV_HEADER: [&'static str; 17] = [
        "p0",
        "dp",
        "income",
        "first_order",
        "ra",
        "robust",
        "path",
        "lower",
        "upper",
        "bounds_kind",
        "var_robust",
        "var_additive",
        "var_first_order",
        "A1",
        "A2",
        "A3",
        "A4",
    ];

    /// One sweep row in the order of [`Self::CSV_HEADER`].
    pub fn csv_record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x}");
        vec![
            f(self.price_change.p0),
            f(self.price_change.dp),
            f(self.price_change.income),
            f(self.first_order),
            f(self.ra),
            f(self.robust),
            f(self.path),
            f(self.bounds.lower),
            f(self.bounds.upper),
            match self.bounds.kind {
                BoundsKind::WorstCase => "worst-case".into(),
                BoundsKind::Chebyshev => "chebyshev".into(),
            },
            self.variance.robust.map(f).unwrap_or_default(),
            f(self.variance.additive),
            f(self.variance.first_order),
            f(self.decomposition.a1),
            f(self.decomposition.a2),
            f(self.decomposition.a3),
            f(self.decomposition.a4),
        ]
    }
}
