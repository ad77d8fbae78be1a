use nalgebra::{DMatrix, DVector};

use super::Objective;
use crate::error::{check_dim, Error, Result};
use crate::glm_sim::rng::GaussianStream;
use crate::linalg;

/// Minimum admissible `σ_min(A)²`; construction fails below it.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

/// `f(θ) = ‖Aθ − b‖^q` with `b = Aθ̂` built at construction.
///
/// Because `b` is always derived from `θ̂`, the problem is realizable and
/// `f(θ̂) = 0`. `AᵀA` must be positive definite; its inverse is cached since
/// the closed-form Hessian inverse needs it at every point.
#[derive(Debug, Clone)]
pub struct PowNormObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
    q: u32,
    theta_hat: DVector<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    sigma_min: f64,
    sigma_max: f64,
}

impl PowNormObjective {
    pub fn new(a: DMatrix<f64>, theta_hat: DVector<f64>, q: u32) -> Result<Self> {
        if q < 4 {
            return Err(Error::InvalidParameter(format!("exponent q = {q} must be at least 4")));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidParameter("matrix A is empty".into()));
        }
        check_dim(a.ncols(), theta_hat.len())?;
        if a.iter().chain(theta_hat.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite entry in A or theta_hat".into()));
        }
        let (sigma_min, sigma_max) = linalg::singular_value_range(&a);
        if a.nrows() < a.ncols() || sigma_min * sigma_min < POSITIVITY_FLOOR {
            return Err(Error::AssumptionViolated(format!(
                "AᵀA is not positive definite: smallest singular value squared {:.3e} < {POSITIVITY_FLOOR:e}",
                sigma_min * sigma_min
            )));
        }
        let gram = linalg::symmetrize(&(a.transpose() * &a));
        let gram_inv = linalg::spd_inverse(&gram).ok_or_else(|| {
            Error::AssumptionViolated("Cholesky factorization of AᵀA failed".into())
        })?;
        let b = &a * &theta_hat;
        Ok(Self { a, b, q, theta_hat, gram, gram_inv, sigma_min, sigma_max })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn theta_hat(&self) -> &DVector<f64> {
        &self.theta_hat
    }

    /// `κ_A = σ_max(A) / σ_min(A)`.
    pub fn condition_number(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    /// Extreme singular values `(σ_min, σ_max)` of `A`.
    pub fn singular_value_range(&self) -> (f64, f64) {
        (self.sigma_min, self.sigma_max)
    }

    pub fn residual(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), theta.len())?;
        Ok(&self.a * theta - &self.b)
    }
}

/// A random pow-norm problem together with its starting point.
#[derive(Debug, Clone)]
pub struct PowNormInstance {
    pub objective: PowNormObjective,
    pub theta0: DVector<f64>,
    /// Number of matrices drawn before one was accepted.
    pub attempts: usize,
}

/// Draws `A` (m×d), `θ̂` and `θ₀` with i.i.d. standard Gaussian entries from
/// the stream seeded by `seed`, redrawing `A` while it violates the
/// positivity floor or has `κ_A > max_condition`, at most `max_attempts`
/// times in total.
pub fn sample_instance(
    m: usize,
    d: usize,
    q: u32,
    seed: u64,
    max_condition: f64,
    max_attempts: usize,
) -> Result<PowNormInstance> {
    if m == 0 || d == 0 || max_attempts == 0 {
        return Err(Error::InvalidParameter("m, d and the attempt budget must be positive".into()));
    }
    let mut stream = GaussianStream::new(seed);
    let theta_hat = DVector::from_vec(stream.normals(d));
    let theta0 = &theta_hat + DVector::from_vec(stream.normals(d));
    let mut last = None;
    for attempt in 1..=max_attempts {
        let a = DMatrix::from_row_slice(m, d, &stream.normals(m * d));
        match PowNormObjective::new(a, theta_hat.clone(), q) {
            Ok(objective) if objective.condition_number() <= max_condition => {
                return Ok(PowNormInstance { objective, theta0, attempts: attempt });
            }
            Ok(objective) => {
                last = Some(Error::AssumptionViolated(format!(
                    "condition number {:.3e} exceeds {max_condition:e}",
                    objective.condition_number()
                )))
            }
            Err(e @ Error::AssumptionViolated(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt was made"))
}

impl Objective for PowNormObjective {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        let r = self.residual(theta)?;
        Ok(r.norm().powi(self.q as i32))
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.residual(theta)?;
        let q = self.q as i32;
        let scale = f64::from(self.q) * r.norm().powi(q - 2);
        Ok(self.a.tr_mul(&r) * scale)
    }

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let r = self.residual(theta)?;
        let rn = r.norm();
        let d = self.dim();
        if rn == 0.0 {
            return if self.q == 4 {
                Err(Error::SingularPoint { q: self.q })
            } else {
                Ok(DMatrix::zeros(d, d))
            };
        }
        let q = f64::from(self.q);
        let qi = self.q as i32;
        let v = self.a.tr_mul(&r);
        let outer = &v * v.transpose();
        Ok(&self.gram * (q * rn.powi(qi - 2)) + outer * (q * (q - 2.0) * rn.powi(qi - 4)))
    }

    /// Closed form `(AᵀA)⁻¹ / (q‖r‖^{q−2}) − (q−2)(θ−θ̂)(θ−θ̂)ᵀ / (q(q−1)‖r‖^q)`.
    fn hessian_inverse(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let r = self.residual(theta)?;
        let rn = r.norm();
        if rn == 0.0 {
            return Err(Error::SingularHessian);
        }
        let q = f64::from(self.q);
        let qi = self.q as i32;
        let e = theta - &self.theta_hat;
        let first = &self.gram_inv / (q * rn.powi(qi - 2));
        let second = (&e * e.transpose()) * ((q - 2.0) / (q * (q - 1.0) * rn.powi(qi)));
        let inv = first - second;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularHessian);
        }
        Ok(inv)
    }

    fn newton_direction(&self, theta: &DVector<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), grad.len())?;
        Ok(self.hessian_inverse(theta)? * grad)
    }
}
