//! Quasi-Newton convergence on non-strongly-convex objectives.
//!
//! The crate covers two objective families:
//!
//! * [`PowNormObjective`]: `f(θ) = ‖Aθ − b‖^q` with `q ≥ 4` and `b = Aθ̂`,
//!   whose Hessian is singular at the optimum;
//! * [`EmpiricalGlmLoss`]: the least-square loss of a generalized linear
//!   model with polynomial link `z ↦ z^p`.
//!
//! On top of those it provides unit-step Newton and BFGS, gradient descent with
//! constant or Polyak steps, the scalar secant form of BFGS, the exact
//! contraction-factor sequence of BFGS on pow-norm objectives
//! ([`rate`]), and seeded Monte-Carlo machinery for statistical-radius
//! experiments ([`glm_sim`]).

// Guards are written as `!(x > 0.0)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finite_diff;
pub mod glm_sim;
pub mod linalg;
pub mod objectives;
pub mod rate;
pub mod solvers;

pub use error::{Error, Result};
pub use glm_sim::{GlmModelConfig, RadiusSweepResult, Regime};
pub use objectives::{
    double_factorial, EmpiricalGlmLoss, LowSnrPopulationLoss, Objective, PowNormObjective,
};
pub use rate::ContractionSequence;
pub use solvers::{BfgsState, Method, SolverConfig, SolverTrace, StopReason};

pub use nalgebra::{DMatrix, DVector};
