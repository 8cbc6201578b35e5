//! Gauss-Legendre rules on the unit interval and adaptive integration.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Sums with pairwise recursion so that the result does not depend on how
/// a parallel reduction was scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Nodes and weights of an n-point Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(Self::DEFAULT_NODES).expect("default node count is positive")
    }
}

impl QuadratureRule {
    pub const DEFAULT_NODES: usize = 32;

    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let degree = NonZeroUsize::new(n)
            .ok_or_else(|| Error::Argument("quadrature needs at least one node".into()))?;
        let rule = GaussLegendre::new(degree);
        let mut pairs: Vec<(f64, f64)> = rule
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let total = pairwise_sum(&weights);
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_0^1 f(t) dt`.
    pub fn integrate<F: FnMut(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        self.integrate_on(0.0, 1.0, f)
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate_on<F: FnMut(f64) -> Result<f64>>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Result<f64> {
        let len = b - a;
        let mut terms = Vec::with_capacity(self.len());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            terms.push(w * f(a + len * x)?);
        }
        Ok(len * pairwise_sum(&terms))
    }

    /// Doubles the node count from this rule's size until successive estimates
    /// agree to `rel_tol`.
    pub fn integrate_refined<F: FnMut(f64) -> Result<f64>>(
        &self,
        rel_tol: f64,
        mut f: F,
    ) -> Result<f64> {
        const MAX_NODES: usize = 4096;
        let mut n = self.len().max(1);
        let mut prev = self.integrate(&mut f)?;
        loop {
            n *= 2;
            if n > MAX_NODES {
                return Err(Error::Numeric {
                    message: format!("quadrature refinement reached {MAX_NODES} nodes"),
                    achieved: f64::NAN,
                });
            }
            let next = Self::gauss_legendre(n)?.integrate(&mut f)?;
            let change = (next - prev).abs();
            if change <= rel_tol * next.abs() || change <= f64::MIN_POSITIVE {
                return Ok(next);
            }
            prev = next;
        }
    }
}

const SEGMENT_NODES: usize = 64;
const MAX_DEPTH: u32 = 40;

fn segment_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| QuadratureRule::gauss_legendre(SEGMENT_NODES).expect("positive node count"))
}

/// Adaptive 64-node Gauss-Legendre integration of `f` over `[a, b]`.
///
/// `breakpoints` inside `(a, b)` split the interval before adaptation, which
/// is how kinks of piecewise-smooth integrands are handled. A segment is
/// accepted when bisection changes its estimate by at most
/// `rel_tol * |estimate|` plus a tiny absolute floor.
pub fn adaptive_gauss_legendre<F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Argument(format!(
            "invalid integration interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let rule = segment_rule();
    let mut parts = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let whole = rule.integrate_on(w[0], w[1], &mut f)?;
        parts.push(refine(rule, &mut f, w[0], w[1], whole, rel_tol, 0)?);
    }
    Ok(pairwise_sum(&parts))
}

fn refine<F>(
    rule: &QuadratureRule,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mid = 0.5 * (a + b);
    let left = rule.integrate_on(a, mid, &mut *f)?;
    let right = rule.integrate_on(mid, b, &mut *f)?;
    let halves = left + right;
    let err = (halves - whole).abs();
    if err <= rel_tol * halves.abs() + 1e-15 * (b - a) {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numeric {
            message: format!("adaptive quadrature did not converge on [{a}, {b}]"),
            achieved: err / halves.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(refine(rule, f, a, mid, left, rel_tol, depth + 1)?
        + refine(rule, f, mid, b, right, rel_tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_positive_and_normalized() {
        let q = QuadratureRule::default();
        assert_eq!(q.len(), 32);
        assert!(q.weights().iter().all(|w| *w > 0.0));
        assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(q.nodes().iter().all(|x| *x > 0.0 && *x < 1.0));
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let q = QuadratureRule::gauss_legendre(8).unwrap();
        let v = q.integrate(|t| Ok(t.powi(15))).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_handles_smooth_integrands() {
        let q = QuadratureRule::gauss_legendre(4).unwrap();
        let v = q.integrate_refined(1e-12, |t| Ok((3.0 * t).sin())).unwrap();
        assert!((v - (1.0 - 3f64.cos()) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive_gauss_legendre(|x| Ok((x - 0.3).abs()), 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
        let v = adaptive_gauss_legendre(|x| Ok((x - 0.3).abs()), 0.0, 1.0, &[], 1e-10).unwrap();
        assert!((v - 0.29).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }
}
