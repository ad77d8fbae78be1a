use qnrate_core::glm_sim::rng::derive_seed;
use qnrate_core::glm_sim::{
    early_stop_by_validation, estimate_optimal_value, generate_dataset, initial_point, solve, TRAIN_FRACTION,
};
use qnrate_core::{Method, Objective, Regime, SolverConfig, SolverTrace};

use super::{finish, glm_model, init_scheme, join_num, parse_flag, CovarianceKind, Report};
use crate::cli::EmpiricalArgs;
use crate::config::{List, Settings};
use crate::error::{CliError, Result};
use crate::output::{fmt_num, Table};

pub const HEADER: [&str; 8] =
    ["method", "trial", "k", "error_to_theta_star", "train_loss", "val_loss", "early_stop_flag", "stop_reason"];

/// Smallest sample size the train/validation split supports.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalParams {
    pub regime: Regime,
    pub n: usize,
    pub d: usize,
    pub p: u32,
    pub trials: usize,
    pub seed: u64,
    pub iters: usize,
    pub step: f64,
    pub methods: Vec<Method>,
    pub covariance: CovarianceKind,
    pub rho: f64,
}

impl Default for EmpiricalParams {
    fn default() -> Self {
        Self {
            regime: Regime::LowSnr,
            n: 10_000,
            d: 4,
            p: 2,
            trials: 1,
            seed: 0,
            iters: 1000,
            step: 0.1,
            methods: vec![Method::GdConstant, Method::GdPolyak, Method::Newton, Method::Bfgs],
            covariance: CovarianceKind::Decay,
            rho: 1.0,
        }
    }
}

/// One solver run with its validation curve.
#[derive(Debug, Clone)]
pub struct EmpiricalRun {
    pub trial: usize,
    pub trace: SolverTrace,
    pub val_losses: Vec<f64>,
    pub early_stop: usize,
}

/// For every trial: draw `n` samples, train on 90 % of them, and run each
/// method from the trial's starting point. Trial seeds are derived exactly
/// as in the radius sweep, so `(seed, n, trial)` fixes the data either way.
pub fn simulate(p: &EmpiricalParams) -> Result<Vec<EmpiricalRun>> {
    if p.n < MIN_SAMPLES {
        return Err(CliError::Usage(format!("n = {} is below {MIN_SAMPLES}", p.n)));
    }
    if p.trials == 0 || p.methods.is_empty() {
        return Err(CliError::Usage("need at least one trial and one method".into()));
    }
    let model = glm_model(p.regime, p.d, p.p, p.covariance, p.seed)?;
    let init = init_scheme(p.d, p.rho)?;
    let mut runs = Vec::new();
    for trial in 0..p.trials {
        let path = [p.n as u64, trial as u64];
        let data = generate_dataset(&model, p.n, derive_seed(p.seed, &[path[0], path[1], 0]))?;
        let (train, val) = data.split(TRAIN_FRACTION)?;
        let start = initial_point(&model, init, derive_seed(p.seed, &[path[0], path[1], 1]));
        let f_star = if p.methods.contains(&Method::GdPolyak) {
            Some(estimate_optimal_value(&train, &start.theta0)?)
        } else {
            None
        };
        for &method in &p.methods {
            let mut config = SolverConfig::new(method).with_max_iters(p.iters);
            if method == Method::GdConstant {
                config = config.with_step_size(p.step);
            }
            let trace = solve(&train, &model, &config, &start, f_star)?;
            let val_losses = trace.iterates.iter().map(|t| val.value(t)).collect::<qnrate_core::Result<Vec<_>>>()?;
            let early_stop = early_stop_by_validation(&train, &val, &trace)?.index;
            runs.push(EmpiricalRun { trial, trace, val_losses, early_stop });
        }
    }
    Ok(runs)
}

pub fn empirical_table(runs: &[EmpiricalRun]) -> Table {
    let mut table = Table::new(&HEADER);
    for run in runs {
        let t = &run.trace;
        for k in 0..t.len() {
            table.push(vec![
                t.method.to_string(),
                run.trial.to_string(),
                k.to_string(),
                fmt_num(t.errors[k]),
                fmt_num(t.losses[k]),
                fmt_num(run.val_losses[k]),
                u8::from(k == run.early_stop).to_string(),
                t.stop_reason.to_string(),
            ]);
        }
    }
    table
}

pub fn run(args: &EmpiricalArgs, mut s: Settings) -> Result<Report> {
    let base = EmpiricalParams::default();
    let regime: Regime = s.value("regime", parse_flag("regime", args.regime.as_deref())?, base.regime)?;
    let methods: List<Method> =
        s.value("methods", parse_flag("methods", args.methods.as_deref())?, List(base.methods.clone()))?;
    let params = EmpiricalParams {
        regime,
        n: s.value("n", args.n, base.n)?,
        d: s.value("d", args.d, base.d)?,
        p: s.value("p", args.p, base.p)?,
        trials: s.value("trials", args.trials, base.trials)?,
        seed: s.value("seed", args.seed, base.seed)?,
        iters: s.value("iters", args.iters, base.iters)?,
        step: s.value("step", args.step, base.step)?,
        methods: methods.0,
        covariance: s.value("covariance", parse_flag("covariance", args.covariance.as_deref())?, base.covariance)?,
        rho: s.value("rho", args.rho, base.rho)?,
    };
    let out = s.out_path(args.out.clone(), &format!("empirical_{regime}.csv"))?;
    let runs = simulate(&params)?;
    let table = empirical_table(&runs);
    let model = glm_model(params.regime, params.d, params.p, params.covariance, params.seed)?;
    let flagged = runs.iter().filter(|r| r.trace.stop_reason.is_breakdown()).count();
    let diagnostics = vec![
        ("theta_star".to_string(), join_num(model.theta_star.iter().cloned())),
        ("flagged_runs".to_string(), flagged.to_string()),
    ];
    finish(&s, &table, &out, diagnostics)
}
