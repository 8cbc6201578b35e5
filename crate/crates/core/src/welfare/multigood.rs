use nalgebra::{DMatrix, DVector};

use crate::budget::{Budget, PriceChange};
use crate::error::{Error, Result};
use crate::surface::MultigoodSurface;

/// Mean compensated price Jacobian with its definiteness diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatedJacobian {
    pub matrix: DMatrix<f64>,
    pub max_eigenvalue: f64,
    /// Largest eigenvalue at most [`NSD_TOL`].
    pub negative_semidefinite: bool,
}

pub const NSD_TOL: f64 = 1e-10;

fn check_square(m: &DMatrix<f64>, k: usize) -> Result<()> {
    if m.nrows() != k || m.ncols() != k {
        return Err(Error::Shape {
            expected: k,
            found: if m.nrows() != k { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// `½ (D_p M1 + D_p M1ᵀ + D_y M2)`, the population average of individual
/// Slutsky matrices under Slutsky symmetry.
pub fn compensated_jacobian_multigood<S: MultigoodSurface + ?Sized>(
    s: &S,
    b: &Budget,
) -> Result<CompensatedJacobian> {
    let k = s.goods();
    if b.dim() != k {
        return Err(Error::Shape {
            expected: k,
            found: b.dim(),
        });
    }
    let jac = s.jacobian(b)?;
    let dy2 = s.d_income_second(b)?;
    check_square(&jac, k)?;
    check_square(&dy2, k)?;
    let raw = (&jac + jac.transpose() + &dy2) * 0.5;
    let matrix = (&raw + raw.transpose()) * 0.5;
    let max_eigenvalue = matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CompensatedJacobian {
        matrix,
        max_eigenvalue,
        negative_semidefinite: max_eigenvalue <= NSD_TOL,
    })
}

/// Second-order mean CV for a vector price change:
/// `Δpᵀ M1 + ½ Δpᵀ S Δp` with `S` from [`compensated_jacobian_multigood`].
pub fn cv_mean_multigood<S: MultigoodSurface + ?Sized>(s: &S, pc: &PriceChange) -> Result<f64> {
    let b = pc.from_budget();
    if b.dim() != s.goods() {
        return Err(Error::Shape {
            expected: s.goods(),
            found: b.dim(),
        });
    }
    if pc.is_zero() {
        return Ok(0.0);
    }
    let dp = DVector::from_column_slice(pc.delta());
    let m1 = s.mean_vector(b)?;
    if m1.len() != dp.len() {
        return Err(Error::Shape {
            expected: dp.len(),
            found: m1.len(),
        });
    }
    let jac = compensated_jacobian_multigood(s, b)?.matrix;
    Ok(dp.dot(&m1) + 0.5 * dp.dot(&(jac * &dp)))
}
