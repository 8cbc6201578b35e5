use thiserror::Error;

/// Errors raised by the welfare-moments library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A budget, price or income left the strictly positive domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A moment of higher order than the surface supports was requested.
    #[error("order error: requested order {requested} but the surface supports at most {max}")]
    Order { requested: usize, max: usize },

    /// A fitted surface is missing a consecutive order.
    #[error("missing moment fit of order {0}")]
    MissingOrder(usize),

    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error: {message} (achieved {achieved:e})")]
    Numeric { message: String, achieved: f64 },

    /// The cumulative compensation drove income out of the positive domain.
    #[error("income left the positive domain at t = {t}")]
    DomainExit { t: f64 },

    /// A surface could not be evaluated along the price path.
    #[error("surface not evaluable on the price path at t = {t}: {message}")]
    PathDomain { t: f64, message: String },

    /// Invalid arguments (orderings, ranges, configuration).
    #[error("argument error: {0}")]
    Argument(String),

    /// Vector or matrix dimensions disagree.
    #[error("shape error: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    /// The regression design is rank deficient.
    #[error("singular design; collinear columns: {}", columns.join(", "))]
    SingularDesign { columns: Vec<String> },

    /// Gauss-Newton did not converge.
    #[error(
        "fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})"
    )]
    FitNonConvergence {
        iterations: usize,
        gradient_norm: f64,
        last_iterate: Vec<f64>,
    },

    /// The data cannot support the requested fit.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Too many bootstrap replicates failed.
    #[error("bootstrap unstable: statistic failed on {failures} of {replications} resamples")]
    BootstrapInstability {
        failures: usize,
        replications: usize,
    },

    /// An algebraic identity that must hold did not.
    #[error("internal consistency violated: {what} (discrepancy {discrepancy:e})")]
    InternalConsistency { what: String, discrepancy: f64 },

    /// Linear-programming failure that cannot occur for well-posed input.
    #[error("linear program: {0}")]
    Lp(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Order { .. } => "order",
            Error::MissingOrder(_) => "missing_order",
            Error::Numeric { .. } => "numeric",
            Error::DomainExit { .. } => "domain_exit",
            Error::PathDomain { .. } => "path_domain",
            Error::Argument(_) => "argument",
            Error::Shape { .. } => "shape",
            Error::SingularDesign { .. } => "singular_design",
            Error::FitNonConvergence { .. } => "fit_non_convergence",
            Error::DegenerateData(_) => "degenerate_data",
            Error::BootstrapInstability { .. } => "bootstrap_instability",
            Error::InternalConsistency { .. } => "internal_consistency",
            Error::Lp(_) => "lp",
        }
    }

    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Order { .. }
                | Error::MissingOrder(_)
                | Error::Argument(_)
                | Error::Shape { .. }
                | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
