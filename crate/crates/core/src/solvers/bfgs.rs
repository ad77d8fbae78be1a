use nalgebra::{DMatrix, DVector};

use super::{check_start, Eval, Method, Pushed, Recorder, SolverConfig, SolverTrace, StopReason};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::objectives::Objective;

/// Relative curvature floor: an update needs `sᵀu > CURVATURE_FLOOR · ‖s‖‖u‖`.
pub const CURVATURE_FLOOR: f64 = 1e-14;

/// Tolerance on the asymmetry of a user-supplied `H₀`.
const SYMMETRY_TOL: f64 = 1e-10;

/// The last step had too little curvature for a BFGS update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBreakdown {
    pub curvature: f64,
    pub threshold: f64,
}

/// Iterate, gradient and inverse-Hessian approximation `H_k` of a BFGS run.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsState {
    pub h_matrix: DMatrix<f64>,
    pub theta: DVector<f64>,
    pub grad: DVector<f64>,
}

impl BfgsState {
    pub fn new(theta: DVector<f64>, grad: DVector<f64>, h0: DMatrix<f64>) -> Result<Self> {
        let d = theta.len();
        check_dim(d, grad.len())?;
        if h0.nrows() != d || h0.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: h0.nrows() });
        }
        let scale = h0.amax().max(1.0);
        if linalg::asymmetry(&h0) > SYMMETRY_TOL * scale {
            return Err(Error::InvalidParameter("initial inverse Hessian is not symmetric".into()));
        }
        Ok(Self { h_matrix: h0, theta, grad })
    }

    /// Quasi-Newton direction `H_k ∇f(θ_k)`.
    pub fn direction(&self) -> DVector<f64> {
        &self.h_matrix * &self.grad
    }

    /// Moves to `(theta, grad)` and applies
    /// `H ← (I − ρ s uᵀ) H (I − ρ u sᵀ) + ρ s sᵀ`, `ρ = 1/(sᵀu)`, with
    /// `s = θ_new − θ_old` and `u = ∇f_new − ∇f_old`.
    ///
    /// Expanded as `H − ρ(s (Hu)ᵀ + (Hu) sᵀ) + (ρ² uᵀHu + ρ) s sᵀ`, which costs
    /// O(d²) and keeps `H` exactly symmetric. On breakdown the state is left
    /// untouched.
    pub fn update(&mut self, theta: DVector<f64>, grad: DVector<f64>) -> std::result::Result<(), CurvatureBreakdown> {
        let s = &theta - &self.theta;
        let u = &grad - &self.grad;
        let curvature = s.dot(&u);
        let threshold = CURVATURE_FLOOR * s.norm() * u.norm();
        if !(curvature > threshold) {
            return Err(CurvatureBreakdown { curvature, threshold });
        }
        let rho = 1.0 / curvature;
        let hu = &self.h_matrix * &u;
        let coeff = rho * rho * u.dot(&hu) + rho;
        let d = s.len();
        for j in 0..d {
            for i in 0..=j {
                let v = self.h_matrix[(i, j)] - rho * (s[i] * hu[j] + hu[i] * s[j]) + coeff * (s[i] * s[j]);
                self.h_matrix[(i, j)] = v;
                self.h_matrix[(j, i)] = v;
            }
        }
        self.theta = theta;
        self.grad = grad;
        Ok(())
    }

    /// Secant residual `‖H u − s‖`.
    pub fn secant_residual(&self, s: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (&self.h_matrix * u - s).norm()
    }
}

/// `∇²f(θ₀)⁻¹` when it exists and is positive definite, else the identity.
pub fn default_initial_inverse<O: Objective + ?Sized>(objective: &O, theta0: &DVector<f64>) -> DMatrix<f64> {
    let d = objective.dim();
    objective
        .hessian_inverse(theta0)
        .ok()
        .map(|h| linalg::symmetrize(&h))
        .filter(|h| h.iter().all(|v| v.is_finite()) && h.clone().cholesky().is_some())
        .unwrap_or_else(|| DMatrix::identity(d, d))
}

/// Unit-step BFGS `θ_{k+1} = θ_k − H_k ∇f(θ_k)` starting from `h0`.
pub fn run_bfgs<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    h0: &DMatrix<f64>,
    config: &SolverConfig,
    theta_ref: &DVector<f64>,
) -> Result<SolverTrace> {
    config.expect(Method::Bfgs)?;
    check_start(objective, theta0, theta_ref)?;
    let mut rec = Recorder::new(Method::Bfgs, theta_ref);
    let cur = Eval::at(objective, theta0.clone())?;
    let mut state = BfgsState::new(cur.theta.clone(), cur.grad.clone(), h0.clone())?;
    if let Pushed::Diverged = rec.push(&cur, 0.0, config.divergence_cap) {
        return Ok(rec.finish(StopReason::Diverged));
    }
    let mut grad_norm = cur.grad_norm;
    let mut pending: Option<Eval> = None;
    let mut k = 0;
    let reason = loop {
        if grad_norm <= config.grad_tol {
            break StopReason::GradTol;
        }
        if k == config.max_iters {
            break StopReason::MaxIters;
        }
        if let Some(next) = pending.take() {
            if state.update(next.theta, next.grad).is_err() {
                break StopReason::SecantBreakdown;
            }
        }
        let next = Eval::at(objective, &state.theta - state.direction())?;
        k += 1;
        if let Pushed::Diverged = rec.push(&next, 1.0, config.divergence_cap) {
            break StopReason::Diverged;
        }
        grad_norm = next.grad_norm;
        pending = Some(next);
    };
    Ok(rec.finish(reason))
}
