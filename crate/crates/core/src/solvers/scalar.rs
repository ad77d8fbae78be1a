use nalgebra::{dvector, DVector};

use super::{Eval, Method, Pushed, Recorder, SolverConfig, SolverTrace, StopReason};
use crate::error::{Error, Result};
use crate::objectives::{EmpiricalGlmLoss, Objective};

/// Gradient-difference magnitude below which the secant step is abandoned.
pub const SECANT_FLOOR: f64 = 1e-14;

/// Gradient step used to manufacture `θ_1` when only `θ_0` is given.
pub const SCALAR_FIRST_STEP: f64 = 1e-3;

/// BFGS on a one-dimensional sample loss, where the inverse-Hessian
/// approximation collapses to the secant slope:
///
/// `θ_{k+1} = θ_k − (θ_k − θ_{k−1}) / (∇L(θ_k) − ∇L(θ_{k−1})) · ∇L(θ_k)`.
///
/// The trace starts with both seeds `θ_0, θ_1`. Without `theta1`, the second
/// seed is `θ_0 − 10⁻³ ∇L(θ_0)`. `max_iters` bounds the number of secant steps.
pub fn run_scalar_bfgs(
    loss: &EmpiricalGlmLoss,
    theta0: f64,
    theta1: Option<f64>,
    config: &SolverConfig,
    theta_ref: f64,
) -> Result<SolverTrace> {
    config.expect(Method::ScalarBfgs)?;
    if loss.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: loss.dim() });
    }
    if !theta0.is_finite() || theta1.is_some_and(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("starting points must be finite".into()));
    }
    let reference = dvector![theta_ref];
    let mut rec = Recorder::new(Method::ScalarBfgs, &reference);
    let mut prev = Eval::at(loss, dvector![theta0])?;
    if let Pushed::Diverged = rec.push(&prev, 0.0, config.divergence_cap) {
        return Ok(rec.finish(StopReason::Diverged));
    }
    let second = match theta1 {
        Some(t) => t,
        None => {
            if prev.grad_norm <= config.grad_tol {
                return Ok(rec.finish(StopReason::GradTol));
            }
            theta0 - SCALAR_FIRST_STEP * prev.grad[0]
        }
    };
    if second == theta0 {
        return Err(Error::InvalidParameter("the two starting points coincide".into()));
    }
    let mut cur = Eval::at(loss, dvector![second])?;
    if let Pushed::Diverged = rec.push(&cur, 0.0, config.divergence_cap) {
        return Ok(rec.finish(StopReason::Diverged));
    }
    let mut k = 0;
    let reason = loop {
        if cur.grad_norm <= config.grad_tol {
            break StopReason::GradTol;
        }
        if k == config.max_iters {
            break StopReason::MaxIters;
        }
        let dg = cur.grad[0] - prev.grad[0];
        if !(dg.abs() >= SECANT_FLOOR) {
            break StopReason::SecantBreakdown;
        }
        let step = (cur.theta[0] - prev.theta[0]) / dg;
        let next: DVector<f64> = dvector![cur.theta[0] - step * cur.grad[0]];
        let next = Eval::at(loss, next)?;
        k += 1;
        if let Pushed::Diverged = rec.push(&next, 1.0, config.divergence_cap) {
            break StopReason::Diverged;
        }
        prev = std::mem::replace(&mut cur, next);
    };
    Ok(rec.finish(reason))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless(theta_star: f64) -> EmpiricalGlmLoss {
        let xs: Vec<_> = (0..20).map(|i| dvector![(i as f64 * 0.77).sin() * 2.0]).collect();
        let ys = xs.iter().map(|x| (x[0] * theta_star).powi(2)).collect();
        EmpiricalGlmLoss::new(xs, ys, 2).unwrap()
    }

    #[test]
    fn converges_on_noiseless_data() {
        let loss = noiseless(0.5);
        let cfg = SolverConfig::new(Method::ScalarBfgs).with_max_iters(200);
        let t = run_scalar_bfgs(&loss, 1.0, Some(0.999), &cfg, 0.5).unwrap();
        assert!(t.last()[0] > 0.0);
        assert!((t.last()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stationary_start_stops() {
        let loss = noiseless(0.0);
        let cfg = SolverConfig::new(Method::ScalarBfgs);
        let t = run_scalar_bfgs(&loss, 0.0, None, &cfg, 0.0).unwrap();
        assert_eq!(t.stop_reason, StopReason::GradTol);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn single_seed_uses_small_gradient_step() {
        let loss = noiseless(0.5);
        let cfg = SolverConfig::new(Method::ScalarBfgs).with_max_iters(1);
        let g0 = loss.gradient(&dvector![1.0]).unwrap()[0];
        let t = run_scalar_bfgs(&loss, 1.0, None, &cfg, 0.5).unwrap();
        assert_eq!(t.iterates[1][0], 1.0 - SCALAR_FIRST_STEP * g0);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let loss = noiseless(0.5);
        let cfg = SolverConfig::new(Method::ScalarBfgs);
        assert!(run_scalar_bfgs(&loss, 1.0, Some(1.0), &cfg, 0.5).is_err());
        let wide = EmpiricalGlmLoss::new(vec![dvector![1.0, 2.0]], vec![1.0], 2).unwrap();
        assert!(run_scalar_bfgs(&wide, 1.0, None, &cfg, 0.5).is_err());
    }

    #[test]
    fn equal_gradients_break_down() {
        // With X = Y = 1 and p = 2 the gradient is 4θ³ − 4θ, which takes the
        // value −1.5 at θ = 0.5 and at θ = (−0.5 + √3.25) / 2.
        let loss = EmpiricalGlmLoss::new(vec![dvector![1.0]], vec![1.0], 2).unwrap();
        let other = (-0.5 + 3.25f64.sqrt()) / 2.0;
        let cfg = SolverConfig::new(Method::ScalarBfgs);
        let t = run_scalar_bfgs(&loss, 0.5, Some(other), &cfg, 0.0).unwrap();
        assert_eq!(t.stop_reason, StopReason::SecantBreakdown);
        assert_eq!(t.len(), 2);
    }
}
