//! Moment surfaces: the contract shared by analytic oracle populations and
//! fitted series estimates.
//!
//! A [`MomentSurface`] maps `(n, b)` to the n-th conditional moment of demand
//! for one good, `M_n(b) = E[q(b)^n]`, together with its first partials. A
//! [`ShareSurface`] is the same object in budget-share space with
//! log-price and log-income partials. [`QuantitySurface`] and [`ShareView`]
//! convert between the two.

use nalgebra::{DMatrix, DVector};

use crate::budget::Budget;
use crate::error::{Error, Result};

/// A variable to differentiate with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Price(usize),
    Income,
}

pub(crate) fn check_order(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::Order { requested: n, max });
    }
    Ok(())
}

/// Conditional moments of demand for a single good.
pub trait MomentSurface: Send + Sync {
    /// Highest moment order the surface can evaluate.
    fn max_order(&self) -> usize;

    /// Index of the modeled good within the budget's price vector.
    fn good(&self) -> usize {
        0
    }

    fn moment(&self, n: usize, b: &Budget) -> Result<f64>;

    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64>;

    fn d_income(&self, n: usize, b: &Budget) -> Result<f64>;

    /// Own-price partial.
    fn d_own_price(&self, n: usize, b: &Budget) -> Result<f64> {
        self.d_price(n, b, self.good())
    }

    fn partial(&self, n: usize, b: &Budget, var: Var) -> Result<f64> {
        match var {
            Var::Price(j) => self.d_price(n, b, j),
            Var::Income => self.d_income(n, b),
        }
    }
}

impl<S: MomentSurface + ?Sized> MomentSurface for &S {
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn good(&self) -> usize {
        (**self).good()
    }
    fn moment(&self, n: usize, b: &Budget) -> Result<f64> {
        (**self).moment(n, b)
    }
    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        (**self).d_price(n, b, j)
    }
    fn d_income(&self, n: usize, b: &Budget) -> Result<f64> {
        (**self).d_income(n, b)
    }
}

/// Vector and matrix moments for many-good analyses.
pub trait MultigoodSurface: Send + Sync {
    fn goods(&self) -> usize;

    /// `M1(b)`, the mean demand vector.
    fn mean_vector(&self, b: &Budget) -> Result<DVector<f64>>;

    /// `D_p M1(b)` with entry `(i, j) = dM1_i / dp_j`.
    fn jacobian(&self, b: &Budget) -> Result<DMatrix<f64>>;

    /// `M2(b) = E[q q^T]`.
    fn second_matrix(&self, b: &Budget) -> Result<DMatrix<f64>>;

    /// `D_y M2(b)`.
    fn d_income_second(&self, b: &Budget) -> Result<DMatrix<f64>>;
}

/// Variables of a share surface, which is parameterized in logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogVar {
    Price(usize),
    Income,
}

/// Moments of the budget share `w = p q / y` of one good.
pub trait ShareSurface: Send + Sync {
    fn max_order(&self) -> usize;

    fn good(&self) -> usize {
        0
    }

    fn share_moment(&self, n: usize, b: &Budget) -> Result<f64>;

    /// `dW_n / d log p_j`.
    fn d_log_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64>;

    /// `dW_n / d log y`.
    fn d_log_income(&self, n: usize, b: &Budget) -> Result<f64>;

    /// Second log-partials when available in closed form.
    fn d2_log(
        &self,
        _n: usize,
        _b: &Budget,
        _first: LogVar,
        _second: LogVar,
    ) -> Option<Result<f64>> {
        None
    }

    fn d_log(&self, n: usize, b: &Budget, var: LogVar) -> Result<f64> {
        match var {
            LogVar::Price(j) => self.d_log_price(n, b, j),
            LogVar::Income => self.d_log_income(n, b),
        }
    }
}

impl<S: ShareSurface + ?Sized> ShareSurface for &S {
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn good(&self) -> usize {
        (**self).good()
    }
    fn share_moment(&self, n: usize, b: &Budget) -> Result<f64> {
        (**self).share_moment(n, b)
    }
    fn d_log_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        (**self).d_log_price(n, b, j)
    }
    fn d_log_income(&self, n: usize, b: &Budget) -> Result<f64> {
        (**self).d_log_income(n, b)
    }
    fn d2_log(&self, n: usize, b: &Budget, first: LogVar, second: LogVar) -> Option<Result<f64>> {
        (**self).d2_log(n, b, first, second)
    }
}

/// Quantity-space moments and partials recovered from share moments at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityMoments {
    values: Vec<f64>,
    d_price: Vec<f64>,
    d_income: Vec<f64>,
}

impl QuantityMoments {
    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    /// `M_n`.
    pub fn m(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// Own-price partial `D_p M_n`.
    pub fn dp(&self, n: usize) -> f64 {
        self.d_price[n - 1]
    }

    /// `D_y M_n`.
    pub fn dy(&self, n: usize) -> f64 {
        self.d_income[n - 1]
    }
}

fn own_price_and_income(b: &Budget, good: usize) -> Result<(f64, f64)> {
    b.check_good(good)?;
    let (p, y) = (b.price(good), b.income());
    if !(p > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!(
            "price {p} and income {y} must be positive"
        )));
    }
    Ok((p, y))
}

/// `M_n = (y/p)^n W_n`.
fn quantity_value<S: ShareSurface + ?Sized>(w: &S, n: usize, b: &Budget) -> Result<f64> {
    let (p, y) = own_price_and_income(b, w.good())?;
    Ok((y / p).powi(n as i32) * w.share_moment(n, b)?)
}

/// Chain rule for `dM_n / dp_j`; the own price enters both the share and the conversion factor.
fn quantity_d_price<S: ShareSurface + ?Sized>(
    w: &S,
    n: usize,
    b: &Budget,
    j: usize,
) -> Result<f64> {
    let k = w.good();
    let (p, y) = own_price_and_income(b, k)?;
    b.check_good(j)?;
    let scale = (y / p).powi(n as i32);
    let dlog = w.d_log_price(n, b, j)?;
    if j == k {
        let wn = w.share_moment(n, b)?;
        Ok(scale / p * (dlog - n as f64 * wn))
    } else {
        Ok(scale / b.price(j) * dlog)
    }
}

/// `dM_n / dy = (y^{n-1} / p^n) (dW_n/dlog y + n W_n)`.
fn quantity_d_income<S: ShareSurface + ?Sized>(w: &S, n: usize, b: &Budget) -> Result<f64> {
    let (p, y) = own_price_and_income(b, w.good())?;
    let wn = w.share_moment(n, b)?;
    let dlog = w.d_log_income(n, b)?;
    Ok(y.powi(n as i32 - 1) / p.powi(n as i32) * (dlog + n as f64 * wn))
}

/// Converts share moments and log-partials at `b` into quantity moments and partials.
///
/// For the own good `j` with price `p` and income `y`:
/// `M_n = (y/p)^n W_n`, `D_p M_n = (y^n / p^{n+1})(D_logp W_n - n W_n)` and
/// `D_y M_n = (y^{n-1} / p^n)(D_logy W_n + n W_n)`.
pub fn shares_to_quantities<S: ShareSurface + ?Sized>(
    w: &S,
    b: &Budget,
) -> Result<QuantityMoments> {
    own_price_and_income(b, w.good())?;
    let max = w.max_order();
    let mut out = QuantityMoments {
        values: Vec::with_capacity(max),
        d_price: Vec::with_capacity(max),
        d_income: Vec::with_capacity(max),
    };
    for n in 1..=max {
        out.values.push(quantity_value(w, n, b)?);
        out.d_price.push(quantity_d_price(w, n, b, w.good())?);
        out.d_income.push(quantity_d_income(w, n, b)?);
    }
    Ok(out)
}

/// Views a share surface as a quantity surface.
#[derive(Debug, Clone)]
pub struct QuantitySurface<S> {
    shares: S,
}

impl<S: ShareSurface> QuantitySurface<S> {
    pub fn new(shares: S) -> Self {
        Self { shares }
    }

    pub fn shares(&self) -> &S {
        &self.shares
    }
}

impl<S: ShareSurface> MomentSurface for QuantitySurface<S> {
    fn max_order(&self) -> usize {
        self.shares.max_order()
    }
    fn good(&self) -> usize {
        self.shares.good()
    }
    fn moment(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order())?;
        quantity_value(&self.shares, n, b)
    }
    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        check_order(n, self.max_order())?;
        quantity_d_price(&self.shares, n, b, j)
    }
    fn d_income(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order())?;
        quantity_d_income(&self.shares, n, b)
    }
}

/// Views a quantity surface as a share surface via `w = p q / y`.
#[derive(Debug, Clone)]
pub struct ShareView<S> {
    quantities: S,
}

impl<S: MomentSurface> ShareView<S> {
    pub fn new(quantities: S) -> Self {
        Self { quantities }
    }

    pub fn quantities(&self) -> &S {
        &self.quantities
    }

    fn factor(&self, n: usize, b: &Budget) -> Result<(f64, f64)> {
        let (p, y) = own_price_and_income(b, self.quantities.good())?;
        Ok(((p / y).powi(n as i32), p))
    }
}

impl<S: MomentSurface> ShareSurface for ShareView<S> {
    fn max_order(&self) -> usize {
        self.quantities.max_order()
    }
    fn good(&self) -> usize {
        self.quantities.good()
    }
    fn share_moment(&self, n: usize, b: &Budget) -> Result<f64> {
        let (f, _) = self.factor(n, b)?;
        Ok(f * self.quantities.moment(n, b)?)
    }
    fn d_log_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        let (f, p) = self.factor(n, b)?;
        let dm = self.quantities.d_price(n, b, j)?;
        if j == self.quantities.good() {
            let m = self.quantities.moment(n, b)?;
            Ok(f * (n as f64 * m + p * dm))
        } else {
            Ok(f * b.price(j) * dm)
        }
    }
    fn d_log_income(&self, n: usize, b: &Budget) -> Result<f64> {
        let (f, _) = self.factor(n, b)?;
        let m = self.quantities.moment(n, b)?;
        let dm = self.quantities.d_income(n, b)?;
        Ok(f * (b.income() * dm - n as f64 * m))
    }
}

/// A surface affine in `(p, y)` around an anchor budget.
///
/// The constant surface is the special case with zero slopes. Useful for
/// constructing adversarial surfaces with prescribed partials.
#[derive(Debug, Clone)]
pub struct AffineSurface {
    anchor: Budget,
    good: usize,
    values: Vec<f64>,
    price_slopes: Vec<Vec<f64>>,
    income_slopes: Vec<f64>,
}

impl AffineSurface {
    /// `values[n-1]`, `price_slopes[n-1][j]` and `income_slopes[n-1]` define order `n`.
    pub fn new(
        anchor: Budget,
        good: usize,
        values: Vec<f64>,
        price_slopes: Vec<Vec<f64>>,
        income_slopes: Vec<f64>,
    ) -> Result<Self> {
        anchor.check_good(good)?;
        if values.is_empty() {
            return Err(Error::Argument(
                "affine surface needs at least one order".into(),
            ));
        }
        if price_slopes.len() != values.len() || income_slopes.len() != values.len() {
            return Err(Error::Shape {
                expected: values.len(),
                found: price_slopes.len().min(income_slopes.len()),
            });
        }
        if let Some(row) = price_slopes.iter().find(|r| r.len() != anchor.dim()) {
            return Err(Error::Shape {
                expected: anchor.dim(),
                found: row.len(),
            });
        }
        Ok(Self {
            anchor,
            good,
            values,
            price_slopes,
            income_slopes,
        })
    }

    /// Two-good surface with own-price slopes only.
    pub fn two_good(
        anchor: Budget,
        values: Vec<f64>,
        d_price: Vec<f64>,
        d_income: Vec<f64>,
    ) -> Result<Self> {
        let slopes = d_price.into_iter().map(|d| vec![d]).collect();
        Self::new(anchor, 0, values, slopes, d_income)
    }

    /// `M_n ≡ c` for every order up to `max_order`.
    pub fn constant(anchor: Budget, c: f64, max_order: usize) -> Self {
        let dim = anchor.dim();
        Self {
            anchor,
            good: 0,
            values: vec![c; max_order],
            price_slopes: vec![vec![0.0; dim]; max_order],
            income_slopes: vec![0.0; max_order],
        }
    }
}

impl MomentSurface for AffineSurface {
    fn max_order(&self) -> usize {
        self.values.len()
    }
    fn good(&self) -> usize {
        self.good
    }
    fn moment(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order())?;
        if b.dim() != self.anchor.dim() {
            return Err(Error::Shape {
                expected: self.anchor.dim(),
                found: b.dim(),
            });
        }
        let dp: f64 = self.price_slopes[n - 1]
            .iter()
            .zip(b.prices().iter().zip(self.anchor.prices()))
            .map(|(s, (p, p0))| s * (p - p0))
            .sum();
        Ok(self.values[n - 1]
            + dp
            + self.income_slopes[n - 1] * (b.income() - self.anchor.income()))
    }
    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        check_order(n, self.max_order())?;
        b.check_good(j)?;
        Ok(self.price_slopes[n - 1][j])
    }
    fn d_income(&self, n: usize, _b: &Budget) -> Result<f64> {
        check_order(n, self.max_order())?;
        Ok(self.income_slopes[n - 1])
    }
}

/// One type of a finite mixture with demand affine in `(p, y)` around an anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalType {
    pub weight: f64,
    /// Demand at the anchor budget.
    pub quantity: f64,
    pub d_price: f64,
    pub d_income: f64,
}

impl LocalType {
    /// The type's Slutsky term `D_p q + q D_y q` at the anchor.
    pub fn slutsky(&self) -> f64 {
        self.d_price + self.quantity * self.d_income
    }
}

/// Moments of a finite mixture of locally affine two-good demand types.
///
/// Each type's demand is `q + d_price (p - p0) + d_income (y - y0)`, so
/// moments and their partials are exact polynomial sums.
#[derive(Debug, Clone)]
pub struct FiniteMixtureSurface {
    anchor: Budget,
    types: Vec<LocalType>,
    max_order: usize,
}

impl FiniteMixtureSurface {
    pub fn new(anchor: Budget, types: Vec<LocalType>, max_order: usize) -> Result<Self> {
        if anchor.dim() != 1 {
            return Err(Error::Shape {
                expected: 1,
                found: anchor.dim(),
            });
        }
        if types.is_empty() || types.iter().any(|t| !(t.weight >= 0.0)) {
            return Err(Error::Argument("mixture needs nonnegative weights".into()));
        }
        let total: f64 = types.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            anchor,
            types,
            max_order,
        })
    }

    pub fn types(&self) -> &[LocalType] {
        &self.types
    }

    pub fn anchor(&self) -> &Budget {
        &self.anchor
    }

    fn demand(&self, t: &LocalType, b: &Budget) -> f64 {
        t.quantity
            + t.d_price * (b.price(0) - self.anchor.price(0))
            + t.d_income * (b.income() - self.anchor.income())
    }

    fn weighted(&self, b: &Budget, f: impl Fn(&LocalType, f64) -> f64) -> f64 {
        self.types
            .iter()
            .map(|t| t.weight * f(t, self.demand(t, b)))
            .sum()
    }
}

impl MomentSurface for FiniteMixtureSurface {
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn moment(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order)?;
        Ok(self.weighted(b, |_, q| q.powi(n as i32)))
    }
    fn d_price(&self, n: usize, b: &Budget, j: usize) -> Result<f64> {
        check_order(n, self.max_order)?;
        b.check_good(j)?;
        Ok(self.weighted(b, |t, q| n as f64 * q.powi(n as i32 - 1) * t.d_price))
    }
    fn d_income(&self, n: usize, b: &Budget) -> Result<f64> {
        check_order(n, self.max_order)?;
        Ok(self.weighted(b, |t, q| n as f64 * q.powi(n as i32 - 1) * t.d_income))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Share surface with `W_n ≡ w^n` and zero log-partials.
    struct ConstantShares {
        w: f64,
        orders: usize,
    }

    impl ShareSurface for ConstantShares {
        fn max_order(&self) -> usize {
            self.orders
        }
        fn share_moment(&self, n: usize, _b: &Budget) -> Result<f64> {
            Ok(self.w.powi(n as i32))
        }
        fn d_log_price(&self, _n: usize, _b: &Budget, _j: usize) -> Result<f64> {
            Ok(0.0)
        }
        fn d_log_income(&self, _n: usize, _b: &Budget) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn constant_share_algebra() {
        let w = 0.3;
        let b = Budget::two_good(1.0, 2.0).unwrap();
        let q = shares_to_quantities(&ConstantShares { w, orders: 3 }, &b).unwrap();
        assert!((q.m(1) - 2.0 * w).abs() < 1e-15);
        assert!((q.dy(1) - w).abs() < 1e-15);
        assert!((q.dp(1) + 2.0 * w).abs() < 1e-15);
        // D_y M2 = (y/p^2)(0 + 2 w^2) = 4 w^2
        assert!((q.dy(2) - 4.0 * w * w).abs() < 1e-15);
    }

    #[test]
    fn conversion_rejects_bad_good_index() {
        let b = Budget::two_good(1.0, 2.0).unwrap();
        let s = ConstantShares { w: 0.5, orders: 1 };
        assert!(quantity_d_price(&s, 1, &b, 3).is_err());
    }

    #[test]
    fn share_view_inverts_quantity_surface() {
        let b = Budget::two_good(1.3, 2.4).unwrap();
        let q = AffineSurface::two_good(
            b.clone(),
            vec![0.7, 0.6, 0.5],
            vec![-0.4, -0.5, -0.3],
            vec![0.2, 0.35, 0.4],
        )
        .unwrap();
        let back = QuantitySurface::new(ShareView::new(&q));
        for n in 1..=3 {
            assert!((back.moment(n, &b).unwrap() - q.moment(n, &b).unwrap()).abs() < 1e-12);
            assert!(
                (back.d_own_price(n, &b).unwrap() - q.d_own_price(n, &b).unwrap()).abs() < 1e-12
            );
            assert!((back.d_income(n, &b).unwrap() - q.d_income(n, &b).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn order_overflow_is_reported() {
        let b = Budget::two_good(1.0, 1.0).unwrap();
        let s = AffineSurface::constant(b.clone(), 1.0, 2);
        assert_eq!(
            s.moment(3, &b),
            Err(Error::Order {
                requested: 3,
                max: 2
            })
        );
        assert!(s.moment(0, &b).is_err());
    }

    #[test]
    fn mixture_moments_match_direct_sums() {
        let b = Budget::two_good(1.0, 2.0).unwrap();
        let types = vec![
            LocalType {
                weight: 0.25,
                quantity: 0.5,
                d_price: -1.0,
                d_income: 0.2,
            },
            LocalType {
                weight: 0.75,
                quantity: 1.5,
                d_price: -0.5,
                d_income: 0.4,
            },
        ];
        let s = FiniteMixtureSurface::new(b.clone(), types, 3).unwrap();
        assert!((s.moment(2, &b).unwrap() - (0.25 * 0.25 + 0.75 * 2.25)).abs() < 1e-15);
        assert!(
            (s.d_income(2, &b).unwrap() - (0.25 * 2.0 * 0.5 * 0.2 + 0.75 * 2.0 * 1.5 * 0.4)).abs()
                < 1e-15
        );
    }
}
