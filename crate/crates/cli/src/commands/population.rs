use std::fmt;
use std::str::FromStr;

use qnrate_core::objectives::sample_instance;
use qnrate_core::rate::{contraction_sequence, newton_factor};
use qnrate_core::solvers::{run_bfgs, run_gd_constant, run_gd_polyak, run_newton};
use qnrate_core::{DVector, Method, Objective, PowNormObjective, SolverConfig, SolverTrace};

use super::{finish, parse_flag, Report};
use crate::cli::PopulationArgs;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::output::{fmt_num, Table};

pub const HEADER: [&str; 5] = ["method", "k", "error_norm", "loss", "grad_norm"];

/// Matrices drawn before giving up on the positivity floor.
pub const MAX_ATTEMPTS: usize = 10;

/// Named `(m, d, q, step)` settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    A,
    B,
    C,
    D,
}

impl Preset {
    pub fn params(self) -> (usize, usize, u32, f64) {
        match self {
            Preset::A => (100, 10, 4, 1e-4),
            Preset::B => (100, 10, 10, 1e-8),
            Preset::C => (2000, 1000, 4, 1e-12),
            Preset::D => (2000, 1000, 10, 1e-15),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::A => "a",
            Preset::B => "b",
            Preset::C => "c",
            Preset::D => "d",
        })
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "a" => Ok(Preset::A),
            "b" => Ok(Preset::B),
            "c" => Ok(Preset::C),
            "d" => Ok(Preset::D),
            other => Err(format!("unknown preset `{other}` (expected a, b, c or d)")),
        }
    }
}

/// Initial distance `‖θ₀ − θ̂‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartDistance {
    /// [`stable_distance`] capped at 1.
    Auto,
    Fixed(f64),
}

impl fmt::Display for StartDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartDistance::Auto => f.write_str("auto"),
            StartDistance::Fixed(v) => f.write_str(&fmt_num(*v)),
        }
    }
}

impl FromStr for StartDistance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(StartDistance::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(StartDistance::Fixed(v)),
            _ => Err(format!("`{s}` is neither `auto` nor a positive number")),
        }
    }
}

/// Largest `δ` such that a constant step `η` is stable everywhere within
/// `‖θ − θ̂‖ ≤ δ`: the Hessian norm there is at most
/// `q(q−1) σ_max^q δ^{q−2}`, and `η` times that must not exceed 1.
pub fn stable_distance(q: u32, sigma_max: f64, step: f64) -> f64 {
    let q = f64::from(q);
    (1.0 / (step * q * (q - 1.0) * sigma_max.powf(q))).powf(1.0 / (q - 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    pub m: usize,
    pub d: usize,
    pub q: u32,
    pub step: f64,
    pub iters: usize,
    pub seed: u64,
    pub start_distance: StartDistance,
    pub max_condition: f64,
}

impl PopulationParams {
    pub fn preset(preset: Preset) -> Self {
        let (m, d, q, step) = preset.params();
        Self { m, d, q, step, iters: 1000, seed: 0, start_distance: StartDistance::Auto, max_condition: f64::INFINITY }
    }
}

/// Traces of all four methods on one sampled instance.
#[derive(Debug, Clone)]
pub struct PopulationRun {
    pub objective: PowNormObjective,
    pub theta0: DVector<f64>,
    pub start_distance: f64,
    pub attempts: usize,
    pub traces: Vec<SolverTrace>,
}

pub fn simulate(p: &PopulationParams) -> Result<PopulationRun> {
    if p.d == 0 || p.m < p.d {
        return Err(CliError::Usage(format!("need m ≥ d ≥ 1, got m = {} and d = {}", p.m, p.d)));
    }
    if p.iters == 0 {
        return Err(CliError::Usage("iters must be at least 1".into()));
    }
    let inst = sample_instance(p.m, p.d, p.q, p.seed, p.max_condition, MAX_ATTEMPTS)?;
    let obj = inst.objective;
    let theta_hat = obj.theta_hat().clone();
    let offset = &inst.theta0 - &theta_hat;
    let distance = match p.start_distance {
        StartDistance::Fixed(v) => v,
        StartDistance::Auto => stable_distance(p.q, obj.singular_value_range().1, p.step).min(1.0),
    };
    let theta0 = &theta_hat + offset.normalize() * distance;

    let config = |m: Method| SolverConfig::new(m).with_max_iters(p.iters);
    let gd = run_gd_constant(&obj, &theta0, &config(Method::GdConstant).with_step_size(p.step), &theta_hat)?;
    let polyak = run_gd_polyak(&obj, &theta0, 0.0, &config(Method::GdPolyak), &theta_hat)?;
    let newton = run_newton(&obj, &theta0, &config(Method::Newton), &theta_hat)?;
    let h0 = obj.hessian_inverse(&theta0)?;
    let bfgs = run_bfgs(&obj, &theta0, &h0, &config(Method::Bfgs), &theta_hat)?;
    Ok(PopulationRun {
        objective: obj,
        theta0,
        start_distance: distance,
        attempts: inst.attempts,
        traces: vec![gd, polyak, newton, bfgs],
    })
}

/// Measured traces followed by the predicted `bfgs-theory` and
/// `newton-theory` error series (loss and gradient cells left empty).
pub fn population_table(run: &PopulationRun, iters: usize) -> Result<Table> {
    let mut table = Table::new(&HEADER);
    for trace in &run.traces {
        for k in 0..trace.len() {
            table.push(vec![
                trace.method.to_string(),
                k.to_string(),
                fmt_num(trace.errors[k]),
                fmt_num(trace.losses[k]),
                fmt_num(trace.grad_norms[k]),
            ]);
        }
    }
    let q = run.objective.q();
    let e0 = (&run.theta0 - run.objective.theta_hat()).norm();
    let cumulative = contraction_sequence(q, iters.saturating_sub(1))?.cumulative();
    for (k, c) in cumulative.iter().enumerate() {
        table.push(vec!["bfgs-theory".into(), k.to_string(), fmt_num(e0 * c), String::new(), String::new()]);
    }
    let r = newton_factor(q)?;
    for k in 0..=iters {
        table.push(vec!["newton-theory".into(), k.to_string(), fmt_num(e0 * r.powi(k as i32)), String::new(), String::new()]);
    }
    Ok(table)
}

pub fn run(args: &PopulationArgs, mut s: Settings) -> Result<Report> {
    let preset: Preset = s.value("preset", parse_flag("preset", args.preset.as_deref())?, Preset::A)?;
    let base = PopulationParams::preset(preset);
    let params = PopulationParams {
        m: s.value("m", args.m, base.m)?,
        d: s.value("d", args.d, base.d)?,
        q: s.value("q", args.q, base.q)?,
        step: s.value("step", args.step, base.step)?,
        iters: s.value("iters", args.iters, base.iters)?,
        seed: s.value("seed", args.seed, base.seed)?,
        start_distance: s.value(
            "start-distance",
            parse_flag("start-distance", args.start_distance.as_deref())?,
            base.start_distance,
        )?,
        max_condition: s.value("max-condition", args.max_condition, base.max_condition)?,
    };
    let out = s.out_path(args.out.clone(), &format!("population_{preset}.csv"))?;
    let run = simulate(&params)?;
    let table = population_table(&run, params.iters)?;
    let (sigma_min, sigma_max) = run.objective.singular_value_range();
    let mut diagnostics = vec![
        ("condition_number".to_string(), fmt_num(run.objective.condition_number())),
        ("sigma_min".to_string(), fmt_num(sigma_min)),
        ("sigma_max".to_string(), fmt_num(sigma_max)),
        ("matrix_attempts".to_string(), run.attempts.to_string()),
        ("start_distance".to_string(), fmt_num(run.start_distance)),
    ];
    for t in &run.traces {
        diagnostics.push((format!("stop_reason.{}", t.method), t.stop_reason.to_string()));
    }
    finish(&s, &table, &out, diagnostics)
}
