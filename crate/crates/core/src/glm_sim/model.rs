use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::rng::GaussianStream;
use crate::error::{check_dim, Error, Result};
use crate::objectives::EmpiricalGlmLoss;

/// Tolerance on `‖θ*‖ = 1` in the high-SNR regime.
const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `θ* = 0`.
    LowSnr,
    /// `‖θ*‖ = 1`.
    HighSnr,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::LowSnr => "low-snr",
            Regime::HighSnr => "high-snr",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low-snr" => Ok(Regime::LowSnr),
            "high-snr" => Ok(Regime::HighSnr),
            other => Err(Error::InvalidParameter(format!("unknown regime `{other}`"))),
        }
    }
}

/// Covariance of the Gaussian design.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// Diagonal variances `σ_k²`.
    Diagonal(Vec<f64>),
    /// Full symmetric positive definite matrix.
    Full(DMatrix<f64>),
}

impl Covariance {
    pub fn identity(d: usize) -> Self {
        Covariance::Diagonal(vec![1.0; d])
    }

    /// `σ_k = 0.5^k` for `k = 1 … d`.
    pub fn geometric_decay(d: usize) -> Self {
        Covariance::Diagonal((1..=d).map(|k| 0.25f64.powi(k as i32)).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Diagonal(v) => v.len(),
            Covariance::Full(m) => m.nrows(),
        }
    }

    /// A factor `L` with `L Lᵀ = Σ` (diagonal square root, or lower Cholesky).
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        match self {
            Covariance::Diagonal(v) => {
                if let Some(bad) = v.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
                    return Err(Error::InvalidParameter(format!("covariance entry {bad} is not positive")));
                }
                Ok(DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|s| s.sqrt()))))
            }
            Covariance::Full(m) => {
                if !m.is_square() || crate::linalg::asymmetry(m) > 1e-12 * m.amax().max(1.0) {
                    return Err(Error::InvalidParameter("covariance must be symmetric".into()));
                }
                m.clone()
                    .cholesky()
                    .map(|c| c.l())
                    .ok_or_else(|| Error::InvalidParameter("covariance is not positive definite".into()))
            }
        }
    }
}

/// Generative model `Y = (Xᵀθ*)^p + ζ`, `X ~ N(0, Σ)`, `ζ ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmModelConfig {
    pub d: usize,
    pub p: u32,
    pub theta_star: DVector<f64>,
    pub covariance: Covariance,
    pub noise_std: f64,
    pub regime: Regime,
}

impl GlmModelConfig {
    /// Low-SNR model: `θ* = 0`, identity covariance, `σ = 1`.
    pub fn low_snr(d: usize, p: u32) -> Self {
        Self {
            d,
            p,
            theta_star: DVector::zeros(d),
            covariance: Covariance::identity(d),
            noise_std: 1.0,
            regime: Regime::LowSnr,
        }
    }

    /// High-SNR model with `θ*` drawn uniformly from the unit sphere.
    pub fn high_snr(d: usize, p: u32, seed: u64) -> Self {
        let theta_star = DVector::from_vec(GaussianStream::new(seed).unit_sphere(d));
        Self { theta_star, regime: Regime::HighSnr, ..Self::low_snr(d, p) }
    }

    pub fn new(regime: Regime, d: usize, p: u32, seed: u64) -> Self {
        match regime {
            Regime::LowSnr => Self::low_snr(d, p),
            Regime::HighSnr => Self::high_snr(d, p, seed),
        }
    }

    pub fn with_covariance(mut self, covariance: Covariance) -> Self {
        self.covariance = covariance;
        self
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    /// Checks shapes and the regime invariant on `θ*`.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        match self.regime {
            Regime::LowSnr if self.theta_star.iter().any(|v| *v != 0.0) => {
                Err(Error::InvalidParameter("low-SNR regime requires theta_star = 0".into()))
            }
            Regime::HighSnr if (self.theta_star.norm() - 1.0).abs() > UNIT_NORM_TOL => {
                Err(Error::InvalidParameter("high-SNR regime requires a unit-norm theta_star".into()))
            }
            _ => Ok(()),
        }
    }

    /// Checks dimensions, link power and noise level only.
    pub fn validate_shape(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidParameter(format!("link power p = {} must be at least 2", self.p)));
        }
        check_dim(self.d, self.theta_star.len())?;
        check_dim(self.d, self.covariance.dim())?;
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise std {} must be non-negative", self.noise_std)));
        }
        Ok(())
    }

    /// Estimation error to `θ*` modulo the sign symmetry of even links.
    pub fn error(&self, theta: &DVector<f64>) -> f64 {
        let direct = (theta - &self.theta_star).norm();
        if self.p.is_multiple_of(2) {
            direct.min((theta + &self.theta_star).norm())
        } else {
            direct
        }
    }
}

/// Draws `n` i.i.d. samples from the model. Each sample consumes `d` normals
/// for the design followed by one for the noise, so a seed fixes the dataset
/// bit for bit.
///
/// Only shapes are validated here, so arbitrary `θ*` (e.g. a noiseless model
/// with `θ* = 0.5`) can be simulated; sweeps enforce the regime invariant.
pub fn generate_dataset(config: &GlmModelConfig, n: usize, seed: u64) -> Result<EmpiricalGlmLoss> {
    config.validate_shape()?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let factor = config.covariance.factor()?;
    let d = config.d;
    let p = config.p as i32;
    let mut stream = GaussianStream::new(seed);
    let mut xs = DMatrix::zeros(n, d);
    let mut ys = DVector::zeros(n);
    for i in 0..n {
        let z = DVector::from_vec(stream.normals(d));
        let x = &factor * z;
        let noise = config.noise_std * stream.normal();
        ys[i] = x.dot(&config.theta_star).powi(p) + noise;
        xs.set_row(i, &x.transpose());
    }
    EmpiricalGlmLoss::from_design(xs, ys, config.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn degenerate_model_has_zero_responses() {
        let cfg = GlmModelConfig::low_snr(3, 2).with_noise_std(0.0);
        let data = generate_dataset(&cfg, 50, 1).unwrap();
        assert!(data.responses().iter().all(|y| *y == 0.0));
    }

    #[test]
    fn noiseless_link() {
        let cfg = GlmModelConfig { theta_star: dvector![0.5], ..GlmModelConfig::low_snr(1, 2) }
            .with_noise_std(0.0);
        let data = generate_dataset(&cfg, 20, 4).unwrap();
        for i in 0..data.n() {
            let (x, y) = data.sample(i);
            assert_eq!(y, 0.25 * x[0] * x[0]);
        }
    }

    #[test]
    fn regime_invariants_are_enforced() {
        let mut cfg = GlmModelConfig::low_snr(2, 2);
        cfg.theta_star = dvector![0.1, 0.0];
        assert!(cfg.validate().is_err());
        let mut cfg = GlmModelConfig::high_snr(2, 2, 0);
        assert!(cfg.validate().is_ok());
        cfg.theta_star *= 2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_non_spd_covariance() {
        let cov = Covariance::Full(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        let cfg = GlmModelConfig::low_snr(2, 2).with_covariance(cov);
        assert!(generate_dataset(&cfg, 10, 0).is_err());
        let cfg = GlmModelConfig::low_snr(2, 2).with_covariance(Covariance::Diagonal(vec![1.0, 0.0]));
        assert!(generate_dataset(&cfg, 10, 0).is_err());
    }

    #[test]
    fn full_covariance_is_accepted() {
        let cov = Covariance::Full(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        let cfg = GlmModelConfig::low_snr(2, 2).with_covariance(cov);
        assert_eq!(generate_dataset(&cfg, 10, 0).unwrap().n(), 10);
    }

    #[test]
    fn geometric_decay_variances() {
        match Covariance::geometric_decay(3) {
            Covariance::Diagonal(v) => assert_eq!(v, vec![0.25, 0.0625, 0.015625]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn sign_folded_error() {
        let cfg = GlmModelConfig { theta_star: dvector![0.6, 0.8], ..GlmModelConfig::high_snr(2, 2, 0) };
        assert_eq!(cfg.error(&dvector![-0.6, -0.8]), 0.0);
        let odd = GlmModelConfig { p: 3, ..cfg };
        assert_eq!(odd.error(&dvector![-0.6, -0.8]), 2.0);
    }
}
