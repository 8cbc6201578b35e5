//! Welfare approximations, bounds, variances and decompositions computed
//! from moment surfaces.
//!
//! Compensating variation is signed so that it is positive for price
//! increases. Two-good operations act on the surface's own good and require
//! every other price to stay fixed.

mod bounds;
mod decompose;
mod local;
mod multigood;
mod report;
mod variance;

pub use bounds::{
    chebyshev_bounds, cv_path, default_income_effect_bounds, hn_bounds_local, hn_bounds_path,
    ChebyshevBounds, CHEBYSHEV_S_LEVELS,
};
pub use decompose::{
    cv_decompose, price_index, price_index_decompose, tax_deadweight, Decomposition,
    HomotheticityCorrection, PriceIndexDecomposition, IDENTITY_TOL,
};
pub use local::{
    compensated_moment_fo, compensated_share_moment, cv_first_order, cv_moment_local, cv_ra,
};
pub use multigood::{
    compensated_jacobian_multigood, cv_mean_multigood, CompensatedJacobian, NSD_TOL,
};
pub use report::{
    welfare_report, BoundsKind, BoundsReport, BoundsSpec, PriceChangeSummary, ReportOptions,
    VarianceReport, WelfareReport,
};
pub use variance::{cv_variance, VarianceKind};

#[cfg(test)]
mod tests;
