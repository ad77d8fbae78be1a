//! The eleven acceptance checks, shared by `qnrate selfcheck` and the
//! `acceptance` test target. Each check returns a [`CheckReport`] whose
//! verdict includes its runtime budget.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qnrate_core::finite_diff::{self, FD_STEP};
use qnrate_core::glm_sim::rng::{derive_seed, GaussianStream};
use qnrate_core::glm_sim::stats::median;
use qnrate_core::glm_sim::{empirical_optimum_scalar, generate_dataset, GlmModelConfig};
use qnrate_core::linalg;
use qnrate_core::objectives::sample_instance;
use qnrate_core::rate::{
    certify_envelope, contraction_sequence, fixed_point, g_derivative_bound_check, newton_factor,
};
use qnrate_core::solvers::{
    run_bfgs, run_newton, run_scalar_bfgs, tune_constant_step, DEFAULT_STEP_GRID,
};
use qnrate_core::{
    DMatrix, DVector, EmpiricalGlmLoss, Method, Objective, PowNormObjective, Regime, SolverConfig,
};

use crate::commands::radius::{sweep, RadiusParams};
use crate::commands::CovarianceKind;
use crate::error::Result;

/// Base seed of every randomized check.
pub const SEED: u64 = 0x5EED_2024;

/// Check numbers, in order.
pub const IDS: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

/// Iteration cap for gradient descent in the iteration-count contrast.
pub const GD_ITERATION_CAP: usize = 2000;

/// Runs a command line (without the program name); `Err` carries a message.
pub type Runner<'a> = &'a dyn Fn(&[String]) -> std::result::Result<(), String>;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Diagnostics that do not affect the verdict.
    pub notes: Vec<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CheckReport {
    /// `criterion  N PASS name  (elapsed / budget)  summary`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {:<24} ({:.2} s / {} s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.summary
        )
    }
}

struct Verdict {
    passed: bool,
    summary: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(passed: bool, summary: String) -> Self {
        Self { passed, summary, notes: Vec::new() }
    }
}

pub fn name(id: u8) -> &'static str {
    match id {
        1 => "fixed-point table",
        2 => "bfgs factors",
        3 => "newton factor",
        4 => "factor envelope",
        5 => "map derivative bound",
        6 => "hessian inverse identity",
        7 => "derivative oracles",
        8 => "scalar bfgs descent",
        9 => "radius slopes",
        10 => "iteration contrast",
        11 => "determinism",
        _ => "unknown",
    }
}

pub fn budget(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 | 4 | 11 => 1,
        5..=7 => 5,
        2 | 3 => 10,
        8 => 30,
        10 => 120,
        9 => 300,
        _ => 0,
    })
}

/// Runs check `id`; check 11 runs commands in-process.
pub fn run_check(id: u8) -> CheckReport {
    run_check_with(id, &|args| crate::run_args(args).map(|_| ()).map_err(|e| e.to_string()))
}

/// Runs check `id`, using `runner` for the command lines of check 11.
pub fn run_check_with(id: u8, runner: Runner<'_>) -> CheckReport {
    let start = Instant::now();
    let outcome = match id {
        1 => fixed_point_table(),
        2 => bfgs_factors(),
        3 => newton_ratio(),
        4 => envelope(),
        5 => derivative_bound(),
        6 => hessian_inverse_identity(),
        7 => derivative_oracles(),
        8 => scalar_descent(),
        9 => radius_slopes(),
        10 => iteration_contrast(),
        11 => determinism(runner),
        other => Ok(Verdict::new(false, format!("no check numbered {other}"))),
    };
    let elapsed = start.elapsed();
    let mut verdict = outcome.unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
    if id == 9 {
        verdict.notes.extend(radius_diagnostics());
    }
    let within = elapsed <= budget(id);
    if !within {
        verdict.summary.push_str("; over the runtime budget");
    }
    CheckReport {
        id,
        name: name(id),
        passed: verdict.passed && within,
        summary: verdict.summary,
        notes: verdict.notes,
        elapsed,
        budget: budget(id),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

// 1 ---------------------------------------------------------------------------

fn fixed_point_table() -> Result<Verdict> {
    let table = [(4, 0.755, 0.667), (6, 0.857, 0.800), (10, 0.922, 0.889), (20, 0.963, 0.947)];
    let round3 = |x: f64| (x * 1000.0).round() / 1000.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for (q, r_expected, n_expected) in table {
        let r = fixed_point(q)?;
        let n = newton_factor(q)?;
        ok &= (round3(r) - r_expected).abs() < 1e-9 && (round3(n) - n_expected).abs() < 1e-9;
        parts.push(format!("q={q}: r*={r:.4} newton={n:.4}"));
    }
    Ok(Verdict::new(ok, parts.join(", ")))
}

// 2, 3 ------------------------------------------------------------------------

/// A random instance `‖Aθ − Aθ̂‖^q` with `κ_A ≤ 100`, in two translations:
/// as drawn, and shifted so that `θ̂ = 0`.
struct TheoryInstance {
    centered: PowNormObjective,
    centered_start: DVector<f64>,
    drawn: PowNormObjective,
    drawn_start: DVector<f64>,
}

/// Twenty instances cycling through `d ∈ {2, 10, 50}`, `q ∈ {4, 6, 10}`, `m = 2d`.
fn theory_instances() -> Result<Vec<TheoryInstance>> {
    (0..20u64)
        .map(|i| {
            let d = [2, 10, 50][(i % 3) as usize];
            let q = [4, 6, 10][((i / 3) % 3) as usize];
            let inst = sample_instance(2 * d, d, q, derive_seed(SEED, &[2, i]), 100.0, 50)?;
            let theta_hat = inst.objective.theta_hat().clone();
            let centered = PowNormObjective::new(inst.objective.a().clone(), DVector::zeros(d), q)?;
            Ok(TheoryInstance {
                centered,
                centered_start: &inst.theta0 - &theta_hat,
                drawn: inst.objective,
                drawn_start: inst.theta0,
            })
        })
        .collect()
}

/// Largest relative deviation of the first 20 BFGS error ratios from the
/// recursion, and largest `|cos − 1|` between error vectors and the first one.
fn bfgs_deviation(obj: &PowNormObjective, theta0: &DVector<f64>) -> Result<(f64, f64)> {
    let theta_hat = obj.theta_hat();
    let h0 = obj.hessian_inverse(theta0)?;
    let trace = run_bfgs(obj, theta0, &h0, &SolverConfig::new(Method::Bfgs).with_max_iters(20), theta_hat)?;
    if trace.iterations() < 20 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let seq = contraction_sequence(obj.q(), 19)?;
    let ratio_dev = trace.error_ratios().iter().zip(&seq.factors).map(|(r, f)| rel(*r, *f)).fold(0.0, f64::max);
    let e0 = theta0 - theta_hat;
    let cos_dev = trace.iterates.iter().map(|t| (linalg::cosine(&(t - theta_hat), &e0) - 1.0).abs()).fold(0.0, f64::max);
    Ok((ratio_dev, cos_dev))
}

fn bfgs_factors() -> Result<Verdict> {
    let mut worst = (0.0f64, 0.0f64);
    let mut worst_drawn = (0.0f64, 0.0f64);
    for inst in theory_instances()? {
        let (r, c) = bfgs_deviation(&inst.centered, &inst.centered_start)?;
        worst = (worst.0.max(r), worst.1.max(c));
        let (r, c) = bfgs_deviation(&inst.drawn, &inst.drawn_start)?;
        worst_drawn = (worst_drawn.0.max(r), worst_drawn.1.max(c));
    }
    let mut v = Verdict::new(
        worst.0 <= 1e-6 && worst.1 <= 1e-8,
        format!("max ratio deviation {} (tol 1e-6), max |cos − 1| {} (tol 1e-8)", sci(worst.0), sci(worst.1)),
    );
    v.notes.push(format!(
        "same matrices with the drawn θ̂: max ratio deviation {}, max |cos − 1| {}",
        sci(worst_drawn.0),
        sci(worst_drawn.1)
    ));
    Ok(v)
}

/// Newton ratios checked while the error before the step is at least
/// `floor`: `(max relative deviation, ratios checked, reached the floor)`.
fn newton_deviation(obj: &PowNormObjective, theta0: &DVector<f64>, floor: f64) -> Result<(f64, usize, bool)> {
    let target = newton_factor(obj.q())?;
    let trace = run_newton(obj, theta0, &SolverConfig::new(Method::Newton).with_max_iters(600), obj.theta_hat())?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 1..trace.len() {
        if trace.errors[k - 1] < floor {
            break;
        }
        worst = worst.max(rel(trace.errors[k] / trace.errors[k - 1], target));
        checked += 1;
    }
    let reached = trace.errors.last().is_some_and(|e| *e < floor);
    Ok((worst, checked, reached))
}

fn newton_ratio() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut all_reached = true;
    let mut worst_drawn = 0.0f64;
    for inst in theory_instances()? {
        let (w, n, reached) = newton_deviation(&inst.centered, &inst.centered_start, 1e-12)?;
        worst = worst.max(w);
        checked += n;
        all_reached &= reached;
        let floor = 1e-6 * inst.drawn.theta_hat().norm();
        worst_drawn = worst_drawn.max(newton_deviation(&inst.drawn, &inst.drawn_start, floor)?.0);
    }
    let mut v = Verdict::new(
        worst <= 1e-8 && all_reached,
        format!(
            "max ratio deviation {} over {checked} steps down to error 1e-12 (tol 1e-8){}",
            sci(worst),
            if all_reached { "" } else { "; some runs stopped above 1e-12" }
        ),
    );
    v.notes.push(format!(
        "same matrices with the drawn θ̂, checked down to 1e-6·‖θ̂‖: max ratio deviation {}",
        sci(worst_drawn)
    ));
    Ok(v)
}

// 4, 5 ------------------------------------------------------------------------

fn envelope() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for q in 4..=64 {
        let cert = certify_envelope(q, 200)?;
        worst = worst.max(cert.max_scaled_gap);
        if !cert.holds {
            failures.push(format!("q={q} at k={}", cert.first_violation.unwrap_or(0)));
        }
    }
    Ok(Verdict::new(
        failures.is_empty(),
        format!(
            "max 2^k|r_k − r*|/|r_0 − r*| = {worst:.6} over q = 4..64, k ≤ 200 (512-bit){}",
            if failures.is_empty() { String::new() } else { format!("; violated: {}", failures.join(", ")) }
        ),
    ))
}

fn derivative_bound() -> Result<Verdict> {
    let mut worst = (0.0f64, 0u32);
    let mut ok = true;
    for q in 4..=100 {
        let report = g_derivative_bound_check(q, 10_000)?;
        ok &= report.holds;
        if report.max_abs_derivative > worst.0 {
            worst = (report.max_abs_derivative, q);
        }
    }
    Ok(Verdict::new(ok, format!("max |g′| = {:.9} (q = {}) on 10^4 grid points, q = 4..100", worst.0, worst.1)))
}

// 6, 7 ------------------------------------------------------------------------

fn hessian_inverse_identity() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let d = 2 + (i % 9) as usize;
        let q = 4 + ((i / 9) % 7) as u32;
        let inst = sample_instance(2 * d, d, q, derive_seed(SEED, &[6, i]), 100.0, 50)?;
        let h = inst.objective.hessian(&inst.theta0)?;
        let h_inv = inst.objective.hessian_inverse(&inst.theta0)?;
        worst = worst.max(linalg::max_abs_diff(&(h_inv * h), &DMatrix::identity(d, d)));
    }
    Ok(Verdict::new(worst <= 1e-8, format!("max |H⁻¹H − I| = {} over 50 instances (tol 1e-8)", sci(worst))))
}

fn uniform_vector(s: &mut GaussianStream, d: usize, r: f64) -> DVector<f64> {
    DVector::from_iterator(d, (0..d).map(|_| r * (2.0 * s.uniform() - 1.0)))
}

fn derivative_oracles() -> Result<Verdict> {
    let (mut g_pow, mut h_pow, mut g_glm) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50u64 {
        let mut s = GaussianStream::new(derive_seed(SEED, &[7, i]));
        let q = 4 + (i % 6) as u32;
        let (obj, theta) = loop {
            let a = DMatrix::from_iterator(8, 4, (0..32).map(|_| 2.0 * (2.0 * s.uniform() - 1.0)));
            let theta_hat = uniform_vector(&mut s, 4, 2.0);
            let theta = uniform_vector(&mut s, 4, 2.0);
            let Ok(obj) = PowNormObjective::new(a, theta_hat.clone(), q) else { continue };
            if (&theta - &theta_hat).norm() > 1e-3 {
                break (obj, theta);
            }
        };
        let fd = finite_diff::gradient(|t| obj.value(t).unwrap_or(f64::NAN), &theta, FD_STEP);
        g_pow = g_pow.max(finite_diff::relative_error(&obj.gradient(&theta)?, &fd, 1e-12));
        let fd_h = finite_diff::jacobian(|t| obj.gradient(t).unwrap_or_else(|_| DVector::from_element(4, f64::NAN)), &theta, FD_STEP);
        h_pow = h_pow.max((obj.hessian(&theta)? - &fd_h).norm() / fd_h.norm().max(1e-12));

        let p = 2 + (i % 3) as u32;
        let xs = (0..30).map(|_| uniform_vector(&mut s, 3, 2.0)).collect();
        let ys = (0..30).map(|_| 2.0 * (2.0 * s.uniform() - 1.0)).collect();
        let glm = EmpiricalGlmLoss::new(xs, ys, p)?;
        let theta = uniform_vector(&mut s, 3, 1.0);
        let fd = finite_diff::gradient(|t| glm.value(t).unwrap_or(f64::NAN), &theta, FD_STEP);
        g_glm = g_glm.max(finite_diff::relative_error(&glm.gradient(&theta)?, &fd, 1e-12));
    }
    Ok(Verdict::new(
        g_pow <= 1e-5 && g_glm <= 1e-5 && h_pow <= 1e-4,
        format!(
            "max relative error: pow-norm gradient {}, GLM gradient {} (tol 1e-5), pow-norm Hessian {} (tol 1e-4)",
            sci(g_pow),
            sci(g_glm),
            sci(h_pow)
        ),
    ))
}

// 8 ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, Copy)]
struct DescentTally {
    steps: usize,
    violations: usize,
    seeds_violating: usize,
    zero_optimum_seeds: usize,
    /// Violations among seeds with a nonzero `θ_n*`.
    violations_nonzero_optimum: usize,
}

fn scalar_descent_tally(p: u32) -> Result<DescentTally> {
    let model = GlmModelConfig::low_snr(1, p);
    let floor = f64::from(p) / f64::from(p + 1);
    let config = SolverConfig::new(Method::ScalarBfgs).with_max_iters(200);
    let mut tally = DescentTally::default();
    for seed in 0..20u64 {
        let data = generate_dataset(&model, 10_000, derive_seed(SEED, &[8, u64::from(p), seed]))?;
        let star = empirical_optimum_scalar(&data, 1.0)?;
        let trace = run_scalar_bfgs(&data, 1.0, Some(0.999), &config, 0.0)?;
        let th: Vec<f64> = trace.iterates.iter().map(|t| t[0]).collect();
        let mut bad = 0;
        for k in 1..th.len().saturating_sub(1) {
            if th[k] <= 2.0 * star.abs() {
                break;
            }
            tally.steps += 1;
            let next = th[k + 1];
            if !(next > 0.0 && next < th[k] && next >= floor * th[k]) {
                bad += 1;
            }
        }
        tally.violations += bad;
        tally.seeds_violating += usize::from(bad > 0);
        if star == 0.0 {
            tally.zero_optimum_seeds += 1;
        } else {
            tally.violations_nonzero_optimum += bad;
        }
    }
    Ok(tally)
}

fn scalar_descent() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for p in [2u32, 3] {
        let t = scalar_descent_tally(p)?;
        ok &= t.violations == 0;
        parts.push(format!("p={p}: {} violations in {} steps ({} of 20 seeds)", t.violations, t.steps, t.seeds_violating));
        notes.push(format!(
            "p={p}: {} of 20 seeds have θ_n* = 0 (negative moment ratio); violations on seeds with θ_n* > 0: {}",
            t.zero_optimum_seeds, t.violations_nonzero_optimum
        ));
    }
    Ok(Verdict { passed: ok, summary: parts.join("; "), notes })
}

// 9 ---------------------------------------------------------------------------

fn radius_params(regime: Regime, covariance: CovarianceKind) -> RadiusParams {
    RadiusParams { regime, covariance, seed: SEED, ..RadiusParams::default() }
}

fn radius_slopes() -> Result<Verdict> {
    let low = sweep(&radius_params(Regime::LowSnr, CovarianceKind::Decay))?;
    let high = sweep(&radius_params(Regime::HighSnr, CovarianceKind::Decay))?;
    let low_ok = (low.fitted_slope - (-0.25)).abs() <= 0.08;
    let high_ok = (high.fitted_slope - (-0.5)).abs() <= 0.1;
    let flagged = |r: &qnrate_core::RadiusSweepResult| r.rows.iter().filter(|row| row.flagged).count();
    let mut v = Verdict::new(
        low_ok && high_ok,
        format!(
            "low-SNR slope {:.3} ± {:.3} (want −0.25 ± 0.08) {}; high-SNR slope {:.3} ± {:.3} (want −0.5 ± 0.1) {}",
            low.fitted_slope,
            low.slope_stderr,
            if low_ok { "ok" } else { "out of range" },
            high.fitted_slope,
            high.slope_stderr,
            if high_ok { "ok" } else { "out of range" },
        ),
    );
    v.notes.push(format!(
        "protocol: d=4, p=2, σ_k=0.5^k, BFGS from ∇²L(θ₀)⁻¹, θ₀ on the unit sphere around θ*, 200 iterations, 40 trials; flagged runs low {} / high {}",
        flagged(&low),
        flagged(&high)
    ));
    Ok(v)
}

/// The same sweep with an identity design covariance, where every direction
/// of θ is identifiable at these sample sizes.
fn radius_diagnostics() -> Vec<String> {
    let mut notes = Vec::new();
    for regime in [Regime::LowSnr, Regime::HighSnr] {
        match sweep(&radius_params(regime, CovarianceKind::Identity)) {
            Ok(r) => notes.push(format!(
                "diagnostic, identity covariance, {regime}: slope {:.3} ± {:.3}",
                r.fitted_slope, r.slope_stderr
            )),
            Err(e) => notes.push(format!("diagnostic, identity covariance, {regime}: error {e}")),
        }
    }
    notes
}

// 10 --------------------------------------------------------------------------

fn iteration_contrast() -> Result<Verdict> {
    let model = GlmModelConfig::low_snr(1, 2);
    let bfgs_config = SolverConfig::new(Method::ScalarBfgs).with_max_iters(200);
    let gd_config = SolverConfig::new(Method::GdConstant).with_max_iters(GD_ITERATION_CAP);
    let (start, origin) = (DVector::from_element(1, 1.0), DVector::zeros(1));
    let mut bfgs_iters = Vec::new();
    let mut gd_iters = Vec::new();
    let mut censored = 0;
    for seed in 0..20u64 {
        let data = generate_dataset(&model, 10_000, derive_seed(SEED, &[10, seed]))?;
        let trace = run_scalar_bfgs(&data, 1.0, Some(0.999), &bfgs_config, 0.0)?;
        let threshold = 1.5 * trace.min_error().1;
        let k_bfgs = trace.first_below(threshold).expect("the minimum is below 1.5 times itself");
        let tuned = tune_constant_step(&data, &start, &DEFAULT_STEP_GRID, &gd_config, &origin, threshold)?;
        let k_gd = tuned.iterations_to_target.unwrap_or_else(|| {
            censored += 1;
            GD_ITERATION_CAP + 1
        });
        bfgs_iters.push(k_bfgs as f64);
        gd_iters.push(k_gd as f64);
    }
    let (mb, mg) = (median(&bfgs_iters), median(&gd_iters));
    Ok(Verdict::new(
        mb <= 50.0 && mg >= 10.0 * mb,
        format!(
            "median iterations to 1.5× BFGS min error: BFGS {mb} (want ≤ 50), tuned GD {mg} (want ≥ {}); {censored} of 20 GD runs censored at {GD_ITERATION_CAP}",
            10.0 * mb
        ),
    ))
}

// 11 --------------------------------------------------------------------------

/// Scratch directory removed on drop.
struct ScratchDir(PathBuf);

impl ScratchDir {
    fn new() -> std::io::Result<Self> {
        let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
        let dir = std::env::temp_dir().join(format!("qnrate-determinism-{}-{nanos}", std::process::id()));
        std::fs::create_dir_all(&dir)?;
        Ok(Self(dir))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// Command lines covering every CSV-producing command plus `svg`; `{out}`
/// is replaced by the output path and `{factors}` by the first factors CSV.
pub const DETERMINISM_COMMANDS: [(&str, &str); 5] = [
    ("factors", "factors --q 4 --k-max 60 --out {out}"),
    ("population", "population --preset a --iters 200 --seed 3 --out {out}"),
    ("empirical", "empirical --n 400 --trials 2 --iters 60 --seed 3 --out {out}"),
    ("radius", "radius --regime high-snr --n-grid 100,200,400 --trials 4 --iters 60 --seed 3 --out {out}"),
    ("svg", "svg --in {factors} --x k --y abs_gap,envelope --log-y --out {out}"),
];

fn determinism(runner: Runner<'_>) -> Result<Verdict> {
    let scratch = ScratchDir::new().map_err(|e| crate::error::CliError::io("cannot create scratch directory", e))?;
    let dir = &scratch.0;
    let factors = dir.join("factors_1.csv");
    let mut differing = Vec::new();
    for (name, template) in DETERMINISM_COMMANDS {
        let ext = if name == "svg" { "svg" } else { "csv" };
        let mut outputs = Vec::new();
        for run in 1..=2 {
            let out = dir.join(format!("{name}_{run}.{ext}"));
            let line = template.replace("{out}", &out.display().to_string()).replace("{factors}", &factors.display().to_string());
            let args: Vec<String> = line.split_whitespace().map(String::from).collect();
            runner(&args).map_err(|e| crate::error::CliError::Numerical(format!("`{line}` failed: {e}")))?;
            outputs.push(read(&out)?);
        }
        if outputs[0] != outputs[1] {
            differing.push(name);
        }
    }
    Ok(Verdict::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} commands produced byte-identical output on rerun", DETERMINISM_COMMANDS.len())
        } else {
            format!("output differs on rerun for: {}", differing.join(", "))
        },
    ))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| crate::error::CliError::read(path, e))
}
