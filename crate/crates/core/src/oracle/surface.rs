use nalgebra::{DMatrix, DVector};

use super::moments::exact_moment_of;
use super::population::{expectation, type_d_income, type_d_price, DemandClosure, Population};
use crate::budget::Budget;
use crate::diff::{central_difference, DerivativeMode, DerivativeScheme};
use crate::error::Result;
use crate::surface::{check_order, MomentSurface, MultigoodSurface};

/// A moment surface backed by exact population moments.
#[derive(Debug, Clone)]
pub struct PopulationSurface<P> {
    pop: P,
    good: usize,
    max_order: usize,
    scheme: DerivativeScheme,
}

/// Wraps a population as a moment surface for its first good.
///
/// With an analytic scheme the partials are expectations of per-type
/// analytic derivatives; otherwise the exact moments are differenced.
pub fn surface_from_population<P: Population>(
    pop: P,
    max_order: usize,
    scheme: DerivativeScheme,
) -> Result<PopulationSurface<P>> {
    scheme.validate()?;
    check_order(1, max_order)?;
    Ok(PopulationSurface {
        pop,
        good: 0,
        max_order,
        scheme,
    })
}

impl<P: Population> PopulationSurface<P> {
    pub fn with_good(mut self, good: usize) -> Self {
        self.good = good;
        self
    }

    pub fn population(&self) -> &P {
        &self.pop
    }

    pub fn scheme(&self) -> &DerivativeScheme {
        &self.scheme
    }

    fn entrywise(
        &self,
        b: &Budget,
        f: impl Fn(&P::Agent, usize, usize) -> Result<f64>,
    ) -> Result<DMatrix<f64>> {
        let k = self.pop.goods();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = expectation(&self.pop, b, |a| f(a, i, j))?;
            }
        }
        Ok(m)
    }
}

impl<P: Population> MomentSurface for PopulationSurface<P> {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn good(&self) -> usize {
        self.good
    }

    fn moment(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order)?;
        exact_moment_of(&self.pop, self.good, n, b)
    }

    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        check_order(n, self.max_order)?;
        b.check_good(j)?;
        let k = self.good;
        match self.scheme.mode {
            DerivativeMode::Analytic => expectation(&self.pop, b, |a| {
                Ok(n as f64 * a.quantity(k, b)?.powi(n as i32 - 1) * type_d_price(a, k, b, j)?)
            }),
            DerivativeMode::CentralDifference => central_difference(
                |p| exact_moment_of(&self.pop, k, n, &b.with_price(j, p)?),
                b.price(j),
                &self.scheme,
                true,
            ),
        }
    }

    fn d_income(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order)?;
        let k = self.good;
        match self.scheme.mode {
            DerivativeMode::Analytic => expectation(&self.pop, b, |a| {
                Ok(n as f64 * a.quantity(k, b)?.powi(n as i32 - 1) * type_d_income(a, k, b)?)
            }),
            DerivativeMode::CentralDifference => central_difference(
                |y| exact_moment_of(&self.pop, k, n, &b.with_income(y)?),
                b.income(),
                &self.scheme,
                true,
            ),
        }
    }
}

impl<P: Population> MultigoodSurface for PopulationSurface<P> {
    fn goods(&self) -> usize {
        self.pop.goods()
    }

    fn mean_vector(&self, b: &Budget) -> Result<DVector<f64>> {
        let k = self.pop.goods();
        let mut v = DVector::zeros(k);
        for i in 0..k {
            v[i] = expectation(&self.pop, b, |a| a.quantity(i, b))?;
        }
        Ok(v)
    }

    fn jacobian(&self, b: &Budget) -> Result<DMatrix<f64>> {
        self.entrywise(b, |a, i, j| type_d_price(a, i, b, j))
    }

    fn second_matrix(&self, b: &Budget) -> Result<DMatrix<f64>> {
        self.entrywise(b, |a, i, j| Ok(a.quantity(i, b)? * a.quantity(j, b)?))
    }

    fn d_income_second(&self, b: &Budget) -> Result<DMatrix<f64>> {
        self.entrywise(b, |a, i, j| {
            Ok(type_d_income(a, i, b)? * a.quantity(j, b)?
                + a.quantity(i, b)? * type_d_income(a, j, b)?)
        })
    }
}
