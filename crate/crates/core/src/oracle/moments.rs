use super::linear::LinearHeteroPopulation;
use super::population::{expectation, type_d_income, DemandClosure, Population};
use super::quantile::QuantileCounterexamplePopulation;
use crate::budget::Budget;
use crate::error::{Error, Result};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("moment order must be at least 1".into()));
    }
    Ok(())
}

/// `M_n(b)` for the first good.
pub fn exact_moment<P: Population + ?Sized>(pop: &P, n: usize, b: &Budget) -> Result<f64> {
    exact_moment_of(pop, 0, n, b)
}

/// `M_n(b) = E[q_good(b)^n]`, in closed form when the population has one.
pub fn exact_moment_of<P: Population + ?Sized>(
    pop: &P,
    good: usize,
    n: usize,
    b: &Budget,
) -> Result<f64> {
    check_n(n)?;
    if let Some(v) = pop.closed_form_moment(good, n, b) {
        return v;
    }
    expectation(pop, b, |a| Ok(a.quantity(good, b)?.powi(n as i32)))
}

/// `E[q^{n−1} ∂_y q]`, which equals `D_y M_n / n`.
pub fn income_effect_moment<P: Population + ?Sized>(pop: &P, n: usize, b: &Budget) -> Result<f64> {
    check_n(n)?;
    expectation(pop, b, |a| {
        Ok(a.quantity(0, b)?.powi(n as i32 - 1) * type_d_income(a, 0, b)?)
    })
}

/// `E[q (∂_y q)^n]`.
pub fn income_effect_power<P: Population + ?Sized>(pop: &P, n: usize, b: &Budget) -> Result<f64> {
    expectation(pop, b, |a| {
        Ok(a.quantity(0, b)? * type_d_income(a, 0, b)?.powi(n as i32))
    })
}

/// `E[q (∂_y q)^n]` under the linear fixture and under its observationally
/// equivalent quantile counterpart, in that order.
pub fn counterexample_discrepancy(n: usize, b: &Budget) -> Result<(f64, f64)> {
    Ok((
        income_effect_power(&LinearHeteroPopulation::l0(), n, b)?,
        income_effect_power(&QuantileCounterexamplePopulation, n, b)?,
    ))
}
