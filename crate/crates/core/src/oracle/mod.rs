//! Synthetic populations with exact moments and exact compensating variation.

mod any;
mod cobb_douglas;
mod cv;
mod linear;
mod moments;
mod population;
mod quantile;
mod surface;

pub use any::{AnyAgent, AnyPopulation};
pub use cobb_douglas::{aggregate_expenditure, CobbDouglasPopulation, CobbDouglasType};
pub use cv::{
    exact_cv_constant_income_effect, exact_cv_type, population_cv, CvDistribution,
    CV_NODES_PER_SEGMENT,
};
pub use linear::{LinearHeteroPopulation, LinearType};
pub use moments::{
    counterexample_discrepancy, exact_moment, exact_moment_of, income_effect_moment,
    income_effect_power,
};
pub use population::{
    draw_agent, expectation, type_d_income, type_d_price, Branch, DemandClosure, Population,
    TYPE_QUADRATURE_TOL,
};
pub use quantile::{QuantileCounterexamplePopulation, QuantileType};
pub use surface::{surface_from_population, PopulationSurface};

pub use crate::ode::OdeConfig;
