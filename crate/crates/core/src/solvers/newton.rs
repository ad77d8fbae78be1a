use nalgebra::DVector;

use super::{check_start, Eval, Method, Pushed, Recorder, SolverConfig, SolverTrace, StopReason};
use crate::error::Result;
use crate::objectives::Objective;

/// Unit-step Newton `θ_{k+1} = θ_k − ∇²f(θ_k)⁻¹ ∇f(θ_k)`.
///
/// The direction comes from [`Objective::newton_direction`]: the closed-form
/// inverse for pow-norm objectives, a dense factorization otherwise. An
/// unusable Hessian ends the run with [`StopReason::SecantBreakdown`].
pub fn run_newton<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    config: &SolverConfig,
    theta_ref: &DVector<f64>,
) -> Result<SolverTrace> {
    config.expect(Method::Newton)?;
    check_start(objective, theta0, theta_ref)?;
    let mut rec = Recorder::new(Method::Newton, theta_ref);
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
        let direction = match objective.newton_direction(&cur.theta, &cur.grad) {
            Ok(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => break StopReason::SecantBreakdown,
        };
        cur = Eval::at(objective, &cur.theta - direction)?;
        k += 1;
        if let Pushed::Diverged = rec.push(&cur, 1.0, config.divergence_cap) {
            break StopReason::Diverged;
        }
    };
    Ok(rec.finish(reason))
}
