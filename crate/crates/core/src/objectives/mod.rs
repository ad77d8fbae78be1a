//! Objective families with analytic value, gradient and Hessian.

mod glm;
mod population;
mod pow_norm;

pub use glm::EmpiricalGlmLoss;
pub use population::{double_factorial, LowSnrPopulationLoss};
pub use pow_norm::{sample_instance, PowNormInstance, PowNormObjective, POSITIVITY_FLOOR};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ridge added to a Hessian whose dense factorization fails.
pub const NEWTON_RIDGE: f64 = 1e-12;

/// The minimal contract shared by every objective the solvers accept.
///
/// Implementations are immutable and evaluation is pure, so a single
/// objective can back any number of concurrent solver runs.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Inverse of the Hessian at `theta`.
    ///
    /// The default factorizes the dense Hessian (LU) and retries once with
    /// [`NEWTON_RIDGE`] on the diagonal.
    fn hessian_inverse(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self.hessian(theta)?;
        dense_inverse(h)
    }

    /// Newton direction `∇²f(θ)⁻¹ g`.
    fn newton_direction(&self, theta: &DVector<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
        let h = self.hessian(theta)?;
        dense_solve(h, grad)
    }
}

fn dense_inverse(h: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = h.nrows();
    if let Some(inv) = h.clone().lu().try_inverse() {
        if inv.iter().all(|v| v.is_finite()) {
            return Ok(inv);
        }
    }
    let ridged = h + DMatrix::identity(d, d) * NEWTON_RIDGE;
    match ridged.lu().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => Ok(inv),
        _ => Err(Error::SingularHessian),
    }
}

fn dense_solve(h: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let d = h.nrows();
    if let Some(x) = h.clone().lu().solve(rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    let ridged = h + DMatrix::identity(d, d) * NEWTON_RIDGE;
    match ridged.lu().solve(rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::SingularHessian),
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        (**self).value(theta)
    }
    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(theta)
    }
    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        (**self).hessian(theta)
    }
    fn hessian_inverse(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        (**self).hessian_inverse(theta)
    }
    fn newton_direction(&self, theta: &DVector<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).newton_direction(theta, grad)
    }
}
