//! Heterogeneity-robust welfare analysis from cross-sectional moments of demand.
//!
//! The library is organized around [`MomentSurface`]: an evaluatable map from
//! a budget to conditional moments of demand and their partial derivatives.
//! Surfaces come either from analytic populations ([`oracle`]) or from series
//! fits to data ([`estimation`]); [`welfare`] turns them into compensating
//! variation approximations and bounds, and [`rationality`] tests them for
//! consistency with utility maximization.

pub mod budget;
pub mod diff;
pub mod error;
pub mod estimation;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod rationality;
pub mod surface;
pub mod welfare;

pub use budget::{Budget, PriceChange};
pub use diff::{numeric_partial, DerivativeMode, DerivativeScheme};
pub use error::{Error, Result};
pub use quadrature::QuadratureRule;
pub use surface::{
    shares_to_quantities, AffineSurface, FiniteMixtureSurface, LocalType, LogVar, MomentSurface,
    MultigoodSurface, QuantityMoments, QuantitySurface, ShareSurface, ShareView, Var,
};
