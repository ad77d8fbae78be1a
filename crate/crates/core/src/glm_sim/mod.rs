//! Seeded simulation of the polynomial-link GLM and statistical-radius
//! experiments.

mod model;
mod optimum;
pub mod rng;
pub mod stats;
mod sweep;

pub use model::{generate_dataset, Covariance, GlmModelConfig, Regime};
pub use optimum::{empirical_optimum_scalar, moment_ratio, radius_scale};
pub use sweep::{
    early_stop_by_validation, estimate_optimal_value, initial_point, run_radius_sweep, run_radius_sweep_with,
    solve, EarlyStop, InitScheme, RadiusSummary, RadiusSweepResult, Start, SweepOptions, SweepRow,
    TRAIN_FRACTION,
};
