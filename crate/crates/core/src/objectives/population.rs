use nalgebra::{DMatrix, DVector};

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// `k!! = 1 · 3 · 5 ⋯ k` for odd `k`; `1` for `k ≤ 1`.
pub fn double_factorial(k: u32) -> Result<u64> {
    if k <= 1 {
        return Ok(1);
    }
    if k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("double factorial of even {k} is not supported")));
    }
    (3..=k as u64)
        .step_by(2)
        .try_fold(1u64, |acc, j| acc.checked_mul(j))
        .ok_or_else(|| Error::InvalidParameter(format!("{k}!! overflows u64")))
}

/// Population loss of the GLM at `θ* = 0`:
/// `(2p − 1)!! ‖Σ^{1/2} θ‖^{2p} + σ²`.
#[derive(Debug, Clone)]
pub struct LowSnrPopulationLoss {
    sigma_sqrt: DMatrix<f64>,
    p: u32,
    noise_var: f64,
    moment: f64,
}

impl LowSnrPopulationLoss {
    pub fn new(sigma_sqrt: DMatrix<f64>, p: u32, noise_var: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("link power p = {p} must be at least 2")));
        }
        if !sigma_sqrt.is_square() || sigma_sqrt.nrows() == 0 {
            return Err(Error::InvalidParameter("covariance square root must be square".into()));
        }
        if !(noise_var >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise variance {noise_var} must be non-negative")));
        }
        let moment = double_factorial(2 * p - 1)? as f64;
        Ok(Self { sigma_sqrt, p, noise_var, moment })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

impl Objective for LowSnrPopulationLoss {
    fn dim(&self) -> usize {
        self.sigma_sqrt.ncols()
    }

    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), theta.len())?;
        let r = &self.sigma_sqrt * theta;
        Ok(self.moment * r.norm().powi(2 * self.p as i32) + self.noise_var)
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), theta.len())?;
        let q = 2 * self.p as i32;
        let r = &self.sigma_sqrt * theta;
        let scale = self.moment * f64::from(q) * r.norm().powi(q - 2);
        Ok(self.sigma_sqrt.tr_mul(&r) * scale)
    }

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), theta.len())?;
        let q = 2 * self.p as i32;
        let qf = f64::from(q);
        let r = &self.sigma_sqrt * theta;
        let rn = r.norm();
        let d = self.dim();
        if rn == 0.0 {
            // q = 2p ≥ 4; only q = 4 leaves a 0^0 factor.
            return if q == 4 {
                Err(Error::SingularPoint { q: q as u32 })
            } else {
                Ok(DMatrix::zeros(d, d))
            };
        }
        let gram = self.sigma_sqrt.tr_mul(&self.sigma_sqrt);
        let v = self.sigma_sqrt.tr_mul(&r);
        let h = gram * (qf * rn.powi(q - 2)) + (&v * v.transpose()) * (qf * (qf - 2.0) * rn.powi(q - 4));
        Ok(h * self.moment)
    }
}
