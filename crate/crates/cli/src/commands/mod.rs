//! One module per subcommand. Each resolves its settings, computes a
//! [`Table`], and writes it together with its manifest.

pub mod empirical;
pub mod factors;
pub mod population;
pub mod radius;
pub mod selfcheck;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qnrate_core::glm_sim::rng::derive_seed;
use qnrate_core::glm_sim::{Covariance, GlmModelConfig, InitScheme};
use qnrate_core::Regime;

use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::output::{RunManifest, Table};

/// Files written by a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub artifacts: Vec<PathBuf>,
}

/// Seed path from which the high-SNR `θ*` is derived.
const THETA_STAR_STREAM: u64 = 0x7468_6574_6173;

/// Writes `table` to `out` plus `<out>.manifest`; warns about config keys the
/// command did not use.
pub(crate) fn finish(settings: &Settings, table: &Table, out: &Path, diagnostics: Vec<(String, String)>) -> Result<Report> {
    for key in settings.unused() {
        eprintln!("qnrate: warning: config key `{key}` is not used by `{}`", settings.command());
    }
    table.write(out)?;
    let mut manifest = RunManifest::new(settings.command(), settings.parameters());
    manifest.diagnostics = diagnostics;
    let manifest_path = manifest.write_for(out)?;
    Ok(Report { artifacts: vec![out.to_path_buf(), manifest_path] })
}

/// Writes an SVG chart to `out` plus `<out>.manifest`.
pub(crate) fn finish_svg(settings: &Settings, svg: &str, out: &Path) -> Result<Report> {
    for key in settings.unused() {
        eprintln!("qnrate: warning: config key `{key}` is not used by `{}`", settings.command());
    }
    std::fs::write(out, svg).map_err(|e| CliError::write(out, e))?;
    let manifest_path = RunManifest::new(settings.command(), settings.parameters()).write_for(out)?;
    Ok(Report { artifacts: vec![out.to_path_buf(), manifest_path] })
}

/// Parses an optional string flag into a typed value.
pub(crate) fn parse_flag<T>(key: &str, raw: Option<&str>) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    raw.map(|r| r.parse::<T>().map_err(|e| CliError::Usage(format!("--{key} `{r}`: {e}")))).transpose()
}

/// Design covariance of the GLM experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    /// `σ_k = 0.5^k`, `k = 1 … d`.
    Decay,
    Identity,
}

impl CovarianceKind {
    pub fn build(self, d: usize) -> Covariance {
        match self {
            CovarianceKind::Decay => Covariance::geometric_decay(d),
            CovarianceKind::Identity => Covariance::identity(d),
        }
    }
}

impl fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovarianceKind::Decay => "decay",
            CovarianceKind::Identity => "identity",
        })
    }
}

impl FromStr for CovarianceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "decay" => Ok(CovarianceKind::Decay),
            "identity" => Ok(CovarianceKind::Identity),
            other => Err(format!("unknown covariance `{other}` (expected decay or identity)")),
        }
    }
}

/// GLM shared by `empirical` and `radius`; the high-SNR `θ*` comes from
/// `seed` so the whole run is fixed by one number.
pub fn glm_model(regime: Regime, d: usize, p: u32, covariance: CovarianceKind, seed: u64) -> Result<GlmModelConfig> {
    if d == 0 {
        return Err(CliError::Usage("d must be at least 1".into()));
    }
    let model = GlmModelConfig::new(regime, d, p, derive_seed(seed, &[THETA_STAR_STREAM])).with_covariance(covariance.build(d));
    model.validate()?;
    Ok(model)
}

/// Scalar seed pair in one dimension, a sphere of radius `rho` otherwise.
pub fn init_scheme(d: usize, rho: f64) -> Result<InitScheme> {
    if d == 1 {
        return Ok(InitScheme::default_for(1));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(CliError::Usage(format!("rho {rho} must be positive")));
    }
    Ok(InitScheme::Sphere { radius: rho })
}

pub(crate) fn join_num(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(crate::output::fmt_num).collect::<Vec<_>>().join(",")
}
