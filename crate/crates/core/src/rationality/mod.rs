//! Necessary conditions for a moment surface to be generated by a
//! population of utility maximizers.
//!
//! For a polynomial `π`, the translation `Γ(π)(b) = E[(D_p q + q D_y q) π(q)]`
//! is a linear functional of moment partials. Slutsky negativity of every
//! type forces `Γ(π) ≤ 0` for every `π` nonnegative on the support of demand.
//! A pass verdict means no violation was found; it is not a certificate.

pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::oracle::Population;
use crate::surface::{check_order, MomentSurface};

/// Default margin below which a verdict passes.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// `Γ(x^i)(b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub degree: usize,
    pub budget: Budget,
    pub value: f64,
}

/// `Γ(x^i)(b) = (1/(i+1)) D_p M_{i+1}(b) + (1/(i+2)) D_y M_{i+2}(b)`.
pub fn translation<S: MomentSurface + ?Sized>(
    s: &S,
    degree: usize,
    b: &Budget,
) -> Result<Translation> {
    check_order(degree + 2, s.max_order())?;
    let i = degree as f64;
    let value = s.d_own_price(degree + 1, b)? / (i + 1.0) + s.d_income(degree + 2, b)? / (i + 2.0);
    Ok(Translation {
        degree,
        budget: b.clone(),
        value,
    })
}

/// `n⁻¹ D_p M_n + (n+1)⁻¹ D_y M_{n+1}`, which must be `≤ 0`.
///
/// This is the translation of the monomial of degree `n − 1`.
pub fn slutsky_moment_inequality<S: MomentSurface + ?Sized>(
    s: &S,
    n: usize,
    b: &Budget,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("moment order must be at least 1".into()));
    }
    Ok(translation(s, n - 1, b)?.value)
}

/// `Γ(Σ a_i x^i)(b) = Σ a_i Γ(x^i)(b)`.
pub fn translate_polynomial<S: MomentSurface + ?Sized>(
    coeffs: &[f64],
    s: &S,
    b: &Budget,
) -> Result<f64> {
    if coeffs.is_empty() {
        return Ok(0.0);
    }
    check_order(coeffs.len() + 1, s.max_order())?;
    let mut total = 0.0;
    for (i, a) in coeffs.iter().enumerate() {
        if *a != 0.0 {
            total += a * translation(s, i, b)?.value;
        }
    }
    Ok(total)
}

/// An interval containing demand at a budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub q_min: f64,
    pub q_max: f64,
}

/// Relative half-width of the neighborhood used for empirical supports.
pub const EMPIRICAL_NEIGHBORHOOD: f64 = 0.05;

impl SupportBox {
    pub fn new(q_min: f64, q_max: f64) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite()) || q_min > q_max {
            return Err(Error::Argument(format!(
                "support box [{q_min}, {q_max}] is invalid"
            )));
        }
        Ok(Self { q_min, q_max })
    }

    /// Exact support of an oracle population.
    pub fn from_population<P: Population + ?Sized>(
        pop: &P,
        good: usize,
        b: &Budget,
    ) -> Result<Self> {
        let (lo, hi) = pop.support(good, b)?;
        Self::new(lo, hi)
    }

    /// `[min, max]` of observed demand at budgets whose prices and income are
    /// all within 5% (relative) of `b`.
    pub fn empirical(observations: &[(Budget, f64)], b: &Budget) -> Result<Self> {
        let near = |x: f64, c: f64| (x - c).abs() <= EMPIRICAL_NEIGHBORHOOD * c.abs();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (ob, q) in observations {
            if ob.dim() == b.dim()
                && near(ob.income(), b.income())
                && ob
                    .prices()
                    .iter()
                    .zip(b.prices())
                    .all(|(p, c)| near(*p, *c))
            {
                lo = lo.min(*q);
                hi = hi.max(*q);
            }
        }
        if lo > hi {
            return Err(Error::DegenerateData(
                "no observations in the budget neighborhood".into(),
            ));
        }
        Self::new(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityVerdict {
    pub budget: Budget,
    pub degree: usize,
    pub pass: bool,
    /// Largest inequality value; at most the tolerance on a pass.
    pub worst_margin: f64,
    /// Coefficients of a violating polynomial, lowest degree first; empty on a pass.
    pub witness_coeffs: Vec<f64>,
}

/// Checks the generators of degree-one polynomials nonnegative on the box:
/// `Γ(1)`, `Γ(x − q_min)`, `Γ(q_max − x)`, and `Γ(x)` when `q_min ≥ 0`.
pub fn degree1_cone_test<S: MomentSurface + ?Sized>(
    s: &S,
    b: &Budget,
    bx: &SupportBox,
) -> Result<RationalityVerdict> {
    check_order(3, s.max_order())?;
    let bx = SupportBox::new(bx.q_min, bx.q_max)?;
    let g0 = translation(s, 0, b)?.value;
    let g1 = translation(s, 1, b)?.value;
    let mut candidates = vec![
        (g0, vec![1.0, 0.0]),
        (g1 - bx.q_min * g0, vec![-bx.q_min, 1.0]),
        (bx.q_max * g0 - g1, vec![bx.q_max, -1.0]),
    ];
    if bx.q_min >= 0.0 {
        candidates.push((g1, vec![0.0, 1.0]));
    }
    let (worst_margin, witness) =
        candidates
            .into_iter()
            .fold((f64::NEG_INFINITY, Vec::new()), |acc, c| {
                if c.0 > acc.0 {
                    c
                } else {
                    acc
                }
            });
    let pass = worst_margin <= DEFAULT_TOLERANCE;
    Ok(RationalityVerdict {
        budget: b.clone(),
        degree: 1,
        pass,
        worst_margin,
        witness_coeffs: if pass { Vec::new() } else { witness },
    })
}

/// `G` Chebyshev extrema on `[lo, hi]`, endpoints included.
pub fn chebyshev_grid(lo: f64, hi: f64, g: usize) -> Vec<f64> {
    if g == 1 || lo == hi {
        return vec![0.5 * (lo + hi); g.max(1)];
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut xs: Vec<f64> = (0..g)
        .map(|j| mid - half * (std::f64::consts::PI * j as f64 / (g - 1) as f64).cos())
        .collect();
    xs[0] = lo;
    xs[g - 1] = hi;
    xs
}

/// Searches for a polynomial of degree `≤ d`, nonnegative on a grid of the
/// support box, whose translation is positive.
///
/// Solves `max Γ(Σ a_i x^i)` subject to `Σ a_i x_j^i ≥ 0` at `G` Chebyshev
/// points and `Σ |a_i| ≤ 1`, with `a = a⁺ − a⁻`.
pub fn lp_violation_search<S: MomentSurface + ?Sized>(
    s: &S,
    b: &Budget,
    degree: usize,
    bx: &SupportBox,
    grid_size: usize,
) -> Result<RationalityVerdict> {
    check_order(degree + 2, s.max_order())?;
    let bx = SupportBox::new(bx.q_min, bx.q_max)?;
    if grid_size < 10 * (degree + 1) {
        return Err(Error::Argument(format!(
            "grid of {grid_size} points is too coarse for degree {degree}; need at least {}",
            10 * (degree + 1)
        )));
    }
    let k = degree + 1;
    let gammas: Vec<f64> = (0..k)
        .map(|i| translation(s, i, b).map(|t| t.value))
        .collect::<Result<_>>()?;
    let mut c = gammas.clone();
    c.extend(gammas.iter().map(|g| -g));

    let mut rows = Vec::with_capacity(grid_size + 1);
    let mut rhs = Vec::with_capacity(grid_size + 1);
    for x in chebyshev_grid(bx.q_min, bx.q_max, grid_size) {
        let powers: Vec<f64> = (0..k).map(|i| x.powi(i as i32)).collect();
        let mut row: Vec<f64> = powers.iter().map(|v| -v).collect();
        row.extend(powers.iter());
        rows.push(row);
        rhs.push(0.0);
    }
    rows.push(vec![1.0; 2 * k]);
    rhs.push(1.0);

    let sol = simplex::maximize(&c, &rows, &rhs)?;
    let coeffs: Vec<f64> = (0..k).map(|i| sol.x[i] - sol.x[k + i]).collect();
    let pass = sol.objective <= DEFAULT_TOLERANCE;
    Ok(RationalityVerdict {
        budget: b.clone(),
        degree,
        pass,
        worst_margin: sol.objective,
        witness_coeffs: if pass { Vec::new() } else { coeffs },
    })
}

/// [`lp_violation_search`] at several budgets, solved in parallel.
/// Verdicts follow the input order.
pub fn lp_violation_search_many<S: MomentSurface + ?Sized>(
    s: &S,
    budgets: &[(Budget, SupportBox)],
    degree: usize,
    grid_size: usize,
) -> Result<Vec<RationalityVerdict>> {
    budgets
        .par_iter()
        .map(|(b, bx)| lp_violation_search(s, b, degree, bx, grid_size))
        .collect()
}
