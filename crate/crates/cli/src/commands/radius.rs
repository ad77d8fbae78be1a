use qnrate_core::glm_sim::{run_radius_sweep_with, SweepOptions, TRAIN_FRACTION};
use qnrate_core::{Method, RadiusSweepResult, Regime, SolverConfig};

use super::{finish, glm_model, init_scheme, parse_flag, CovarianceKind, Report};
use crate::cli::RadiusArgs;
use crate::config::{List, Settings};
use crate::error::{CliError, Result};
use crate::output::{fmt_num, Table};

pub const HEADER: [&str; 5] = ["n", "median_min_error", "q25", "q75", "median_iters_to_min"];

/// `10², 10^{2.5}, 10³, 10^{3.5}, 10⁴`, rounded.
pub const DEFAULT_N_GRID: [usize; 5] = [100, 316, 1000, 3162, 10_000];

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusParams {
    pub regime: Regime,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub d: usize,
    pub p: u32,
    pub method: Method,
    pub iters: usize,
    pub step: f64,
    pub covariance: CovarianceKind,
    pub rho: f64,
}

impl Default for RadiusParams {
    fn default() -> Self {
        Self {
            regime: Regime::LowSnr,
            n_grid: DEFAULT_N_GRID.to_vec(),
            trials: 40,
            seed: 0,
            d: 4,
            p: 2,
            method: Method::Bfgs,
            iters: 200,
            step: 0.1,
            covariance: CovarianceKind::Decay,
            rho: 1.0,
        }
    }
}

pub fn sweep(p: &RadiusParams) -> Result<RadiusSweepResult> {
    if p.n_grid.len() < 3 {
        return Err(CliError::Usage(format!("n-grid needs at least 3 points, got {}", p.n_grid.len())));
    }
    if p.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("n-grid must be strictly ascending".into()));
    }
    let model = glm_model(p.regime, p.d, p.p, p.covariance, p.seed)?;
    let mut solver = SolverConfig::new(p.method).with_max_iters(p.iters);
    if p.method == Method::GdConstant {
        solver = solver.with_step_size(p.step);
    }
    let options = SweepOptions { init: Some(init_scheme(p.d, p.rho)?), train_fraction: TRAIN_FRACTION };
    Ok(run_radius_sweep_with(&model, &solver, &p.n_grid, p.trials, p.seed, &options)?)
}

/// Per-`n` summary rows and a `# fitted_slope=…,slope_stderr=…` footer.
pub fn radius_table(result: &RadiusSweepResult) -> Table {
    let mut table = Table::new(&HEADER);
    for s in result.summary() {
        table.push(vec![
            s.n.to_string(),
            fmt_num(s.median_min_error),
            fmt_num(s.q25),
            fmt_num(s.q75),
            fmt_num(s.median_iters_to_min),
        ]);
    }
    table.footer.push(format!(
        "fitted_slope={},slope_stderr={}",
        fmt_num(result.fitted_slope),
        fmt_num(result.slope_stderr)
    ));
    table
}

pub fn run(args: &RadiusArgs, mut s: Settings) -> Result<Report> {
    let base = RadiusParams::default();
    let regime: Regime = s.value("regime", parse_flag("regime", args.regime.as_deref())?, base.regime)?;
    let grid: List<usize> = s.value("n-grid", parse_flag("n-grid", args.n_grid.as_deref())?, List(base.n_grid.clone()))?;
    let params = RadiusParams {
        regime,
        n_grid: grid.0,
        trials: s.value("trials", args.trials, base.trials)?,
        seed: s.value("seed", args.seed, base.seed)?,
        d: s.value("d", args.d, base.d)?,
        p: s.value("p", args.p, base.p)?,
        method: s.value("method", parse_flag("method", args.method.as_deref())?, base.method)?,
        iters: s.value("iters", args.iters, base.iters)?,
        step: s.value("step", args.step, base.step)?,
        covariance: s.value("covariance", parse_flag("covariance", args.covariance.as_deref())?, base.covariance)?,
        rho: s.value("rho", args.rho, base.rho)?,
    };
    let out = s.out_path(args.out.clone(), &format!("radius_{regime}.csv"))?;
    let result = sweep(&params)?;
    let table = radius_table(&result);
    let flagged = result.rows.iter().filter(|r| r.flagged).count();
    let diagnostics = vec![
        ("fitted_slope".to_string(), fmt_num(result.fitted_slope)),
        ("slope_stderr".to_string(), fmt_num(result.slope_stderr)),
        ("flagged_runs".to_string(), flagged.to_string()),
    ];
    finish(&s, &table, &out, diagnostics)
}
