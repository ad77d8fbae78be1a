use nalgebra::DVector;

use super::{check_start, Eval, Method, Pushed, Recorder, SolverConfig, SolverTrace, StopReason};
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// Gradient descent `θ_{k+1} = θ_k − η ∇f(θ_k)` with a constant step.
pub fn run_gd_constant<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    config: &SolverConfig,
    theta_ref: &DVector<f64>,
) -> Result<SolverTrace> {
    config.expect(Method::GdConstant)?;
    check_start(objective, theta0, theta_ref)?;
    let eta = config.step_size;
    let mut rec = Recorder::new(Method::GdConstant, theta_ref);
    let mut cur = Eval::at(objective, theta0.clone())?;
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
        let next = &cur.theta - &cur.grad * eta;
        cur = Eval::at(objective, next)?;
        k += 1;
        if let Pushed::Diverged = rec.push(&cur, eta, config.divergence_cap) {
            break StopReason::Diverged;
        }
    };
    Ok(rec.finish(reason))
}

/// Gradient descent with the Polyak step `η_k = (f(θ_k) − f*) / ‖∇f(θ_k)‖²`.
///
/// Reaching `f(θ_k) ≤ f*` counts as convergence and stops with
/// [`StopReason::GradTol`]; a zero gradient above `f*` is a breakdown.
pub fn run_gd_polyak<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    f_star: f64,
    config: &SolverConfig,
    theta_ref: &DVector<f64>,
) -> Result<SolverTrace> {
    config.expect(Method::GdPolyak)?;
    check_start(objective, theta0, theta_ref)?;
    if !f_star.is_finite() {
        return Err(Error::InvalidParameter(format!("optimal value {f_star} is not finite")));
    }
    let mut rec = Recorder::new(Method::GdPolyak, theta_ref);
    let mut cur = Eval::at(objective, theta0.clone())?;
    if f_star > cur.loss {
        return Err(Error::InvalidParameter(format!(
            "optimal value {f_star} exceeds the starting loss {}",
            cur.loss
        )));
    }
    if let Pushed::Diverged = rec.push(&cur, 0.0, config.divergence_cap) {
        return Ok(rec.finish(StopReason::Diverged));
    }
    let mut k = 0;
    let reason = loop {
        let gap = cur.loss - f_star;
        if cur.grad_norm <= config.grad_tol || gap <= 0.0 {
            break StopReason::GradTol;
        }
        if cur.grad_norm == 0.0 {
            break StopReason::SecantBreakdown;
        }
        if k == config.max_iters {
            break StopReason::MaxIters;
        }
        let eta = gap / (cur.grad_norm * cur.grad_norm);
        let next = &cur.theta - &cur.grad * eta;
        cur = Eval::at(objective, next)?;
        k += 1;
        if let Pushed::Diverged = rec.push(&cur, eta, config.divergence_cap) {
            break StopReason::Diverged;
        }
    };
    Ok(rec.finish(reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::PowNormObjective;
    use nalgebra::{dvector, DMatrix};

    fn quartic() -> PowNormObjective {
        PowNormObjective::new(DMatrix::from_element(1, 1, 1.0), dvector![0.0], 4).unwrap()
    }

    #[test]
    fn constant_step_one_step_arithmetic() {
        let cfg = SolverConfig::new(Method::GdConstant).with_step_size(0.1).with_max_iters(1);
        let t = run_gd_constant(&quartic(), &dvector![1.0], &cfg, &dvector![0.0]).unwrap();
        assert!((t.iterates[1][0] - 0.6).abs() < 1e-15);
        assert_eq!(t.stop_reason, StopReason::MaxIters);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn polyak_one_step_arithmetic() {
        let cfg = SolverConfig::new(Method::GdPolyak).with_max_iters(1);
        let t = run_gd_polyak(&quartic(), &dvector![1.0], 0.0, &cfg, &dvector![0.0]).unwrap();
        assert_eq!(t.step_sizes[1], 1.0 / 16.0);
        assert_eq!(t.iterates[1][0], 0.75);
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let f = quartic();
        let cfg = SolverConfig::new(Method::GdConstant).with_step_size(0.1);
        let t = run_gd_constant(&f, &dvector![0.0], &cfg, &dvector![0.0]).unwrap();
        assert_eq!(t.stop_reason, StopReason::GradTol);
        assert_eq!(t.errors, vec![0.0]);

        let cfg = SolverConfig::new(Method::GdPolyak);
        let t = run_gd_polyak(&f, &dvector![0.0], 0.0, &cfg, &dvector![0.0]).unwrap();
        assert_eq!(t.stop_reason, StopReason::GradTol);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn oversized_step_diverges_cleanly() {
        let cfg = SolverConfig::new(Method::GdConstant).with_step_size(10.0).with_max_iters(100);
        let t = run_gd_constant(&quartic(), &dvector![1.0], &cfg, &dvector![0.0]).unwrap();
        assert_eq!(t.stop_reason, StopReason::Diverged);
        assert!(t.errors.iter().all(|e| e.is_finite() && *e >= 0.0));
    }

    #[test]
    fn rejects_bad_configuration() {
        let f = quartic();
        let bad_step = SolverConfig::new(Method::GdConstant).with_step_size(0.0);
        assert!(run_gd_constant(&f, &dvector![1.0], &bad_step, &dvector![0.0]).is_err());
        let wrong = SolverConfig::new(Method::Newton);
        assert!(run_gd_constant(&f, &dvector![1.0], &wrong, &dvector![0.0]).is_err());
        let polyak = SolverConfig::new(Method::GdPolyak);
        assert!(run_gd_polyak(&f, &dvector![1.0], 2.0, &polyak, &dvector![0.0]).is_err());
        assert!(run_gd_polyak(&f, &dvector![1.0, 2.0], 0.0, &polyak, &dvector![0.0]).is_err());
    }
}
