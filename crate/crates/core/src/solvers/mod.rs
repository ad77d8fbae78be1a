//! Unit-step Newton and BFGS, gradient descent with constant or Polyak steps,
//! and the scalar secant form of BFGS. Every solver records a full trace.

mod bfgs;
mod gd;
mod newton;
mod scalar;
mod tuning;

pub use bfgs::{default_initial_inverse, run_bfgs, BfgsState, CurvatureBreakdown, CURVATURE_FLOOR};
pub use gd::{run_gd_constant, run_gd_polyak};
pub use newton::run_newton;
pub use scalar::{run_scalar_bfgs, SCALAR_FIRST_STEP, SECANT_FLOOR};
pub use tuning::{tune_constant_step, StepTuning, DEFAULT_STEP_GRID};

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::objectives::Objective;

pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    GdConstant,
    GdPolyak,
    Newton,
    Bfgs,
    ScalarBfgs,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::GdConstant, Method::GdPolyak, Method::Newton, Method::Bfgs, Method::ScalarBfgs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GdConstant => "gd-constant",
            Method::GdPolyak => "gd-polyak",
            Method::Newton => "newton",
            Method::Bfgs => "bfgs",
            Method::ScalarBfgs => "scalar-bfgs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Constant step `η`; only read by [`Method::GdConstant`].
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm is at or below this value.
    pub grad_tol: f64,
    /// Abort once the error to the reference point exceeds this value.
    pub divergence_cap: f64,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            step_size: 1.0,
            max_iters: DEFAULT_MAX_ITERS,
            grad_tol: 0.0,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
        }
    }

    pub fn with_step_size(mut self, step_size: f64) -> Self {
        self.step_size = step_size;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_grad_tol(mut self, grad_tol: f64) -> Self {
        self.grad_tol = grad_tol;
        self
    }

    pub fn with_divergence_cap(mut self, cap: f64) -> Self {
        self.divergence_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if self.method == Method::GdConstant && !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gd-constant needs a positive step size, got {}",
                self.step_size
            )));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("grad_tol {} must be non-negative", self.grad_tol)));
        }
        if !(self.divergence_cap > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "divergence_cap {} must be positive",
                self.divergence_cap
            )));
        }
        Ok(())
    }

    fn expect(&self, method: Method) -> Result<()> {
        if self.method != method {
            return Err(Error::InvalidParameter(format!(
                "configuration is for {}, not {method}",
                self.method
            )));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    GradTol,
    MaxIters,
    Diverged,
    /// Non-positive curvature along the last step, a vanishing secant
    /// denominator, or an unusable Hessian.
    SecantBreakdown,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GradTol => "grad-tol",
            StopReason::MaxIters => "max-iters",
            StopReason::Diverged => "diverged",
            StopReason::SecantBreakdown => "secant-breakdown",
        }
    }

    /// The run ended by divergence or breakdown rather than convergence or budget.
    pub fn is_breakdown(self) -> bool {
        matches!(self, StopReason::Diverged | StopReason::SecantBreakdown)
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-iteration record of a solver run. All lists have one entry per
/// recorded iterate `θ_0 … θ_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub method: Method,
    pub iterates: Vec<DVector<f64>>,
    /// `‖θ_k − θ_ref‖`.
    pub errors: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub losses: Vec<f64>,
    /// Step length that produced `θ_k`; `0` for starting points.
    pub step_sizes: Vec<f64>,
    pub stop_reason: StopReason,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Number of update steps taken.
    pub fn iterations(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn last(&self) -> &DVector<f64> {
        self.iterates.last().expect("trace holds at least the starting point")
    }

    /// `(index, error)` of the smallest recorded error; ties go to the
    /// earliest index.
    pub fn min_error(&self) -> (usize, f64) {
        self.errors
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &e)| if e < best.1 { (i, e) } else { best })
    }

    /// First index whose error is at or below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.errors.iter().position(|&e| e <= threshold)
    }

    /// Ratios `errors[k] / errors[k − 1]` for `k ≥ 1`.
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Builds a trace point by point with the shared bookkeeping.
pub(crate) struct Recorder<'a> {
    theta_ref: &'a DVector<f64>,
    trace: SolverTrace,
}

/// Value and gradient at one point, with the gradient norm.
pub(crate) struct Eval {
    pub theta: DVector<f64>,
    pub loss: f64,
    pub grad: DVector<f64>,
    pub grad_norm: f64,
}

impl Eval {
    pub fn at<O: Objective + ?Sized>(objective: &O, theta: DVector<f64>) -> Result<Self> {
        let loss = objective.value(&theta)?;
        let grad = objective.gradient(&theta)?;
        let grad_norm = grad.norm();
        Ok(Self { theta, loss, grad, grad_norm })
    }

    pub fn is_finite(&self) -> bool {
        self.loss.is_finite() && self.grad_norm.is_finite() && self.theta.iter().all(|v| v.is_finite())
    }
}

pub(crate) enum Pushed {
    Ok,
    Diverged,
}

impl<'a> Recorder<'a> {
    pub fn new(method: Method, theta_ref: &'a DVector<f64>) -> Self {
        Self {
            theta_ref,
            trace: SolverTrace {
                method,
                iterates: Vec::new(),
                errors: Vec::new(),
                grad_norms: Vec::new(),
                losses: Vec::new(),
                step_sizes: Vec::new(),
                stop_reason: StopReason::MaxIters,
            },
        }
    }

    /// Records a point unless it is non-finite; reports divergence past `cap`.
    pub fn push(&mut self, eval: &Eval, step: f64, cap: f64) -> Pushed {
        if !eval.is_finite() {
            return Pushed::Diverged;
        }
        let err = (&eval.theta - self.theta_ref).norm();
        self.trace.iterates.push(eval.theta.clone());
        self.trace.errors.push(err);
        self.trace.grad_norms.push(eval.grad_norm);
        self.trace.losses.push(eval.loss);
        self.trace.step_sizes.push(step);
        if err > cap || !err.is_finite() {
            Pushed::Diverged
        } else {
            Pushed::Ok
        }
    }

    pub fn finish(mut self, reason: StopReason) -> SolverTrace {
        self.trace.stop_reason = reason;
        self.trace
    }
}

pub(crate) fn check_start<O: Objective + ?Sized>(
    objective: &O,
    theta0: &DVector<f64>,
    theta_ref: &DVector<f64>,
) -> Result<()> {
    crate::error::check_dim(objective.dim(), theta0.len())?;
    crate::error::check_dim(objective.dim(), theta_ref.len())?;
    if theta0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("starting point is not finite".into()));
    }
    Ok(())
}
