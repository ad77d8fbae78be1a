//! Command-line surface. Every value flag is optional so that a config file
//! or the built-in default can fill it in; see [`crate::config`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qnrate", version, about = "Quasi-Newton convergence experiments: CSV tables, SVG charts and self-checks")]
pub struct Cli {
    /// Line-oriented `key = value` file; flags override it, it overrides defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Theoretical BFGS contraction factors r_k, their limit and the 2^-k envelope.
    Factors(FactorsArgs),
    /// Newton, BFGS and both gradient descents on a random ‖Aθ − b‖^q instance.
    Population(PopulationArgs),
    /// Solver traces on simulated GLM data with train/validation losses.
    Empirical(EmpiricalArgs),
    /// Smallest estimation error against sample size, with a log-log slope.
    Radius(RadiusArgs),
    /// Line chart of CSV columns as a standalone SVG.
    Svg(SvgArgs),
    /// Runs the acceptance checks and prints one PASS/FAIL line per check.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct FactorsArgs {
    /// Exponent q ≥ 4 [default: 4].
    #[arg(long)]
    pub q: Option<u32>,
    /// Last factor index [default: 30].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Output CSV [default: $QNRATE_OUT_DIR/factors_q<q>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PopulationArgs {
    /// Named (m, d, q, step) settings: a = (100, 10, 4, 1e-4), b = (100, 10, 10, 1e-8),
    /// c = (2000, 1000, 4, 1e-12), d = (2000, 1000, 10, 1e-15) [default: a].
    #[arg(long)]
    pub preset: Option<String>,
    /// Exponent q ≥ 4 (overrides the preset).
    #[arg(long)]
    pub q: Option<u32>,
    /// Parameter dimension (overrides the preset).
    #[arg(long)]
    pub d: Option<usize>,
    /// Rows of A, m ≥ d (overrides the preset).
    #[arg(long)]
    pub m: Option<usize>,
    /// Constant gradient-descent step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Iterations per method [default: 1000].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Seed for A, θ̂ and the start direction [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distance ‖θ₀ − θ̂‖, or `auto` for the largest distance at which the
    /// constant step is provably stable, capped at 1 [default: auto].
    #[arg(long)]
    pub start_distance: Option<String>,
    /// Reject matrices with a larger condition number [default: inf].
    #[arg(long)]
    pub max_condition: Option<f64>,
    /// Output CSV [default: $QNRATE_OUT_DIR/population_<preset>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmpiricalArgs {
    /// low-snr or high-snr [default: low-snr].
    #[arg(long)]
    pub regime: Option<String>,
    /// Samples per trial, split 90/10 into train/validation [default: 10000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter dimension [default: 4].
    #[arg(long)]
    pub d: Option<usize>,
    /// Link power [default: 2].
    #[arg(long)]
    pub p: Option<u32>,
    /// Independent datasets [default: 1].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed; θ*, data and starts derive from it [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iterations per method [default: 1000].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Constant gradient-descent step [default: 0.1].
    #[arg(long)]
    pub step: Option<f64>,
    /// Comma-separated methods [default: gd-constant,gd-polyak,newton,bfgs].
    #[arg(long)]
    pub methods: Option<String>,
    /// decay (σ_k = 0.5^k) or identity [default: decay].
    #[arg(long)]
    pub covariance: Option<String>,
    /// Distance of the start from θ* [default: 1].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Output CSV [default: $QNRATE_OUT_DIR/empirical_<regime>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    /// low-snr or high-snr [default: low-snr].
    #[arg(long)]
    pub regime: Option<String>,
    /// Ascending sample sizes, at least three [default: 100,316,1000,3162,10000].
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Datasets per sample size [default: 40].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parameter dimension [default: 4].
    #[arg(long)]
    pub d: Option<usize>,
    /// Link power [default: 2].
    #[arg(long)]
    pub p: Option<u32>,
    /// Solver [default: bfgs].
    #[arg(long)]
    pub method: Option<String>,
    /// Iterations per run [default: 200].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Constant step when the method is gd-constant [default: 0.1].
    #[arg(long)]
    pub step: Option<f64>,
    /// decay (σ_k = 0.5^k) or identity [default: decay].
    #[arg(long)]
    pub covariance: Option<String>,
    /// Distance of the start from θ* when d > 1 [default: 1].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Output CSV [default: $QNRATE_OUT_DIR/radius_<regime>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SvgArgs {
    /// Input CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Column for the horizontal axis.
    #[arg(long)]
    pub x: Option<String>,
    /// Comma-separated columns to plot.
    #[arg(long)]
    pub y: Option<String>,
    /// Split each y column into one series per distinct value of this column.
    #[arg(long)]
    pub group_by: Option<String>,
    #[arg(long)]
    pub log_x: bool,
    #[arg(long)]
    pub log_y: bool,
    #[arg(long)]
    pub title: Option<String>,
    /// Embed the generation time as a comment (breaks byte-identical reruns).
    #[arg(long)]
    pub timestamp: bool,
    /// Output SVG [default: the input path with an .svg extension].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Comma-separated check numbers 1–11 [default: all].
    #[arg(long)]
    pub only: Option<String>,
}
