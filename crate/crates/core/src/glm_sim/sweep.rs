use nalgebra::{dvector, DVector};

use super::model::{generate_dataset, GlmModelConfig};
use super::rng::{derive_seed, GaussianStream};
use super::stats::{fit_log_log, median, quantile};
use crate::error::{Error, Result};
use crate::objectives::{EmpiricalGlmLoss, Objective};
use crate::solvers::{
    default_initial_inverse, run_bfgs, run_gd_constant, run_gd_polyak, run_newton, run_scalar_bfgs,
    Method, SolverConfig, SolverTrace, StopReason,
};

/// Share of each generated dataset used for training; the rest validates.
pub const TRAIN_FRACTION: f64 = 0.9;

/// How solver runs are initialized around `θ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    /// One-dimensional seeds `θ* + s·first`, `θ* + s·second`, where `s` is the
    /// sign of `θ*` (`+` at zero), so both seeds lie on the far side of `θ*`
    /// from the origin.
    ScalarPair { first: f64, second: f64 },
    /// `θ* + radius · u` with `u` uniform on the unit sphere.
    Sphere { radius: f64 },
}

impl InitScheme {
    /// `(1, 0.999)` seeds in one dimension, the unit sphere otherwise.
    pub fn default_for(d: usize) -> Self {
        if d == 1 {
            InitScheme::ScalarPair { first: 1.0, second: 0.999 }
        } else {
            InitScheme::Sphere { radius: 1.0 }
        }
    }
}

/// Starting point(s) of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub theta0: DVector<f64>,
    /// Second seed for the scalar secant method.
    pub theta1: Option<f64>,
}

pub fn initial_point(config: &GlmModelConfig, init: InitScheme, seed: u64) -> Start {
    match init {
        InitScheme::ScalarPair { first, second } if config.d == 1 => {
            let centre = config.theta_star[0];
            let s = if centre < 0.0 { -1.0 } else { 1.0 };
            Start { theta0: dvector![centre + s * first], theta1: Some(centre + s * second) }
        }
        InitScheme::ScalarPair { first, .. } => {
            let u = DVector::from_vec(GaussianStream::new(seed).unit_sphere(config.d));
            Start { theta0: &config.theta_star + u * first, theta1: None }
        }
        InitScheme::Sphere { radius } => {
            let u = DVector::from_vec(GaussianStream::new(seed).unit_sphere(config.d));
            Start { theta0: &config.theta_star + u * radius, theta1: None }
        }
    }
}

/// Smallest training loss reached by long Newton and BFGS runs from `theta0`;
/// stands in for the unknown optimal value that the Polyak step needs.
pub fn estimate_optimal_value(loss: &EmpiricalGlmLoss, theta0: &DVector<f64>) -> Result<f64> {
    let zero = DVector::zeros(loss.dim());
    let newton = run_newton(loss, theta0, &SolverConfig::new(Method::Newton).with_max_iters(500), &zero)?;
    let h0 = default_initial_inverse(loss, theta0);
    let bfgs = run_bfgs(loss, theta0, &h0, &SolverConfig::new(Method::Bfgs).with_max_iters(500), &zero)?;
    Ok(newton.losses.iter().chain(&bfgs.losses).cloned().fold(f64::INFINITY, f64::min))
}

/// Runs the configured method on a sample loss and rewrites the trace errors
/// as [`GlmModelConfig::error`], i.e. modulo the sign symmetry of even links.
///
/// BFGS starts from `∇²L(θ₀)⁻¹` when it is positive definite and from the
/// identity otherwise. Polyak steps use `f_star`, or
/// [`estimate_optimal_value`] when it is `None`.
pub fn solve(
    loss: &EmpiricalGlmLoss,
    model: &GlmModelConfig,
    solver: &SolverConfig,
    start: &Start,
    f_star: Option<f64>,
) -> Result<SolverTrace> {
    let reference = &model.theta_star;
    let theta0 = &start.theta0;
    let mut trace = match solver.method {
        Method::GdConstant => run_gd_constant(loss, theta0, solver, reference)?,
        Method::GdPolyak => {
            let f_star = match f_star {
                Some(v) => v,
                None => estimate_optimal_value(loss, theta0)?,
            };
            let f0 = loss.value(theta0)?;
            run_gd_polyak(loss, theta0, f_star.min(f0), solver, reference)?
        }
        Method::Newton => run_newton(loss, theta0, solver, reference)?,
        Method::Bfgs => {
            let h0 = default_initial_inverse(loss, theta0);
            run_bfgs(loss, theta0, &h0, solver, reference)?
        }
        Method::ScalarBfgs => {
            if loss.dim() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: loss.dim() });
            }
            run_scalar_bfgs(loss, theta0[0], start.theta1, solver, reference[0])?
        }
    };
    trace.errors = trace.iterates.iter().map(|t| model.error(t)).collect();
    Ok(trace)
}

/// Iterate chosen by validation loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    pub index: usize,
    pub val_loss: f64,
}

/// Index of the recorded iterate with the smallest validation loss; ties go
/// to the earliest index and non-finite losses are skipped.
pub fn early_stop_by_validation(
    loss_train: &EmpiricalGlmLoss,
    loss_val: &EmpiricalGlmLoss,
    trace: &SolverTrace,
) -> Result<EarlyStop> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("trace is empty".into()));
    }
    if loss_train.dim() != loss_val.dim() {
        return Err(Error::DimensionMismatch { expected: loss_train.dim(), got: loss_val.dim() });
    }
    let mut best = EarlyStop { index: 0, val_loss: f64::INFINITY };
    for (i, theta) in trace.iterates.iter().enumerate() {
        let v = loss_val.value(theta)?;
        if v.is_finite() && v < best.val_loss {
            best = EarlyStop { index: i, val_loss: v };
        }
    }
    Ok(best)
}

/// One `(n, trial)` run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub trial: usize,
    /// Seed of the generated dataset.
    pub seed: u64,
    /// `min_t ‖θ_t − θ*‖` over the trace.
    pub min_error: f64,
    pub iters_to_min: usize,
    pub early_stop_index: usize,
    pub early_stop_error: f64,
    pub stop_reason: StopReason,
    /// Set when the run diverged or broke down; the row still carries the
    /// errors of its last valid iterates.
    pub flagged: bool,
}

/// Per-sample-size summary across trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSummary {
    pub n: usize,
    pub median_min_error: f64,
    pub q25: f64,
    pub q75: f64,
    pub median_iters_to_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSweepResult {
    /// Sorted by `(n, trial)`.
    pub rows: Vec<SweepRow>,
    /// Slope of `ln median(min_error)` against `ln n`.
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

impl RadiusSweepResult {
    pub fn summary(&self) -> Vec<RadiusSummary> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.rows.len() {
            let n = self.rows[i].n;
            let group: Vec<&SweepRow> = self.rows[i..].iter().take_while(|r| r.n == n).collect();
            let errs: Vec<f64> = group.iter().map(|r| r.min_error).collect();
            let iters: Vec<f64> = group.iter().map(|r| r.iters_to_min as f64).collect();
            out.push(RadiusSummary {
                n,
                median_min_error: median(&errs),
                q25: quantile(&errs, 0.25),
                q75: quantile(&errs, 0.75),
                median_iters_to_min: median(&iters),
            });
            i += group.len();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// `None` selects [`InitScheme::default_for`] the model dimension.
    pub init: Option<InitScheme>,
    pub train_fraction: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { init: None, train_fraction: TRAIN_FRACTION }
    }
}

/// Statistical-radius sweep with default options.
pub fn run_radius_sweep(
    config: &GlmModelConfig,
    solver: &SolverConfig,
    n_grid: &[usize],
    trials: usize,
    seed0: u64,
) -> Result<RadiusSweepResult> {
    run_radius_sweep_with(config, solver, n_grid, trials, seed0, &SweepOptions::default())
}

/// For every `(n, trial)`: draw `n` samples, train on the leading
/// `train_fraction` of them, record the smallest error along the trace and
/// the validation-selected iterate, then fit the log-log slope of the
/// per-`n` medians of the smallest errors.
pub fn run_radius_sweep_with(
    config: &GlmModelConfig,
    solver: &SolverConfig,
    n_grid: &[usize],
    trials: usize,
    seed0: u64,
    options: &SweepOptions,
) -> Result<RadiusSweepResult> {
    config.validate()?;
    solver.validate()?;
    if n_grid.len() < 2 {
        return Err(Error::InvalidParameter("sample-size grid needs at least two points".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sample-size grid must be strictly ascending".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let init = options.init.unwrap_or_else(|| InitScheme::default_for(config.d));
    let mut rows = Vec::with_capacity(n_grid.len() * trials);
    for &n in n_grid {
        for trial in 0..trials {
            let path = [n as u64, trial as u64];
            let data_seed = derive_seed(seed0, &[path[0], path[1], 0]);
            let init_seed = derive_seed(seed0, &[path[0], path[1], 1]);
            let data = generate_dataset(config, n, data_seed)?;
            let (train, val) = data.split(options.train_fraction)?;
            let start = initial_point(config, init, init_seed);
            let trace = solve(&train, config, solver, &start, None)?;
            let (iters_to_min, min_error) = trace.min_error();
            let stop = early_stop_by_validation(&train, &val, &trace)?;
            rows.push(SweepRow {
                n,
                trial,
                seed: data_seed,
                min_error,
                iters_to_min,
                early_stop_index: stop.index,
                early_stop_error: trace.errors[stop.index],
                stop_reason: trace.stop_reason,
                flagged: trace.stop_reason.is_breakdown(),
            });
        }
    }
    let mut result = RadiusSweepResult { rows, fitted_slope: f64::NAN, slope_stderr: f64::NAN };
    let summary = result.summary();
    let ns: Vec<f64> = summary.iter().map(|s| s.n as f64).collect();
    let medians: Vec<f64> = summary.iter().map(|s| s.median_min_error).collect();
    let fit = fit_log_log(&ns, &medians)?;
    result.fitted_slope = fit.slope;
    result.slope_stderr = fit.slope_stderr;
    Ok(result)
}
