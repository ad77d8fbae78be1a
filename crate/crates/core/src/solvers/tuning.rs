use nalgebra::DVector;

use super::{run_gd_constant, Method, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// `{10⁻¹, …, 10⁻⁶}`.
pub const DEFAULT_STEP_GRID: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Best constant step from a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTuning {
    pub step_size: f64,
    /// First iteration reaching the target error, if any step reached it.
    pub iterations_to_target: Option<usize>,
    pub trace: SolverTrace,
}

/// Runs constant-step GD for every step in `grid` and keeps the one that
/// reaches `target_error` first. When no step reaches it, the step with the
/// smallest recorded error wins. Ties go to the earlier grid entry.
pub fn tune_constant_step<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    grid: &[f64],
    base: &SolverConfig,
    theta_ref: &DVector<f64>,
    target_error: f64,
) -> Result<StepTuning> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("step grid is empty".into()));
    }
    let mut best: Option<(StepTuning, f64)> = None;
    for &step in grid {
        let config = SolverConfig { method: Method::GdConstant, step_size: step, ..*base };
        let trace = run_gd_constant(objective, theta0, &config, theta_ref)?;
        let hit = trace.first_below(target_error);
        let min_err = trace.min_error().1;
        let better = match &best {
            None => true,
            Some((b, b_err)) => match (hit, b.iterations_to_target) {
                (Some(k), Some(bk)) => k < bk,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => min_err < *b_err,
            },
        };
        if better {
            best = Some((StepTuning { step_size: step, iterations_to_target: hit, trace }, min_err));
        }
    }
    Ok(best.map(|(t, _)| t).expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::PowNormObjective;
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn picks_fastest_stable_step() {
        let f = PowNormObjective::new(DMatrix::from_element(1, 1, 1.0), dvector![0.0], 4).unwrap();
        let base = SolverConfig::new(Method::GdConstant).with_max_iters(2000);
        let tuned = tune_constant_step(&f, &dvector![1.0], &DEFAULT_STEP_GRID, &base, &dvector![0.0], 0.1).unwrap();
        assert_eq!(tuned.step_size, 1e-1);
        assert!(tuned.iterations_to_target.is_some());
    }
}
