//! Exact contraction factors of unit-step BFGS on `‖Aθ − b‖^q`.
//!
//! With `H₀ = ∇²f(θ₀)⁻¹` the error ratios are `r₀ = (q−2)/(q−1)` and
//! `r_k = g(r_{k−1})` with `g(r) = (1 − r^{q−2}) / (1 − r^{q−1})`. The sequence
//! converges to the root `r_*` of `r^{q−1} + r^{q−2} = 1` at rate at most 1/2.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::error::{Error, Result};

/// Bisection iteration cap for [`fixed_point`].
pub const BISECTION_MAX_ITERS: usize = 200;
/// Grid upper end for the derivative check is `1 − GRID_CLAMP`.
pub const GRID_CLAMP: f64 = 1e-6;
/// Slack allowed above 1/2 in the derivative check.
pub const DERIVATIVE_SLACK: f64 = 1e-9;

/// Exponent above which powers go through `exp(n · ln r)`.
const LOG_POWER_THRESHOLD: u32 = 60;

fn check_q(q: u32) -> Result<()> {
    if q < 4 {
        Err(Error::InvalidParameter(format!("exponent q = {q} must be at least 4")))
    } else {
        Ok(())
    }
}

fn pow(r: f64, n: u32) -> f64 {
    if n > LOG_POWER_THRESHOLD {
        (f64::from(n) * r.ln()).exp()
    } else {
        r.powi(n as i32)
    }
}

/// Theoretical factors `r_0 … r_K` and their limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionSequence {
    pub q: u32,
    pub factors: Vec<f64>,
    pub fixed_point: f64,
}

impl ContractionSequence {
    /// `∏_{j<k} r_j`, the predicted `‖θ_k − θ̂‖ / ‖θ₀ − θ̂‖`, for `k = 0 … K+1`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.factors.len() + 1);
        let mut acc = 1.0;
        out.push(acc);
        for r in &self.factors {
            acc *= r;
            out.push(acc);
        }
        out
    }

    /// `(1/2)^k · |r_0 − r_*|`.
    pub fn envelope(&self, k: usize) -> f64 {
        0.5f64.powi(k as i32) * (self.factors[0] - self.fixed_point).abs()
    }
}

/// Factors `r_0 … r_{k_max}` for exponent `q`.
pub fn contraction_sequence(q: u32, k_max: usize) -> Result<ContractionSequence> {
    check_q(q)?;
    let mut factors = Vec::with_capacity(k_max + 1);
    factors.push(newton_factor(q)?);
    for k in 1..=k_max {
        let next = g_map(q, factors[k - 1])?;
        factors.push(next);
    }
    Ok(ContractionSequence { q, factors, fixed_point: fixed_point(q)? })
}

/// Root in (0, 1) of `r^{q−1} + r^{q−2} = 1`, by bisection on [0, 1] until the
/// bracket can no longer be halved in double precision.
pub fn fixed_point(q: u32) -> Result<f64> {
    check_q(q)?;
    let phi = |r: f64| pow(r, q - 1) + pow(r, q - 2) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton's exact per-step factor `(q−2)/(q−1)`.
pub fn newton_factor(q: u32) -> Result<f64> {
    check_q(q)?;
    Ok(f64::from(q - 2) / f64::from(q - 1))
}

/// `g(r) = (1 − r^{q−2}) / (1 − r^{q−1})` on `[0, 1)`.
pub fn g_map(q: u32, r: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::SingularInput(r));
    }
    Ok((1.0 - pow(r, q - 2)) / (1.0 - pow(r, q - 1)))
}

/// `g′(r) = ((q−1)r^{q−2} − r^{2q−4} − (q−2)r^{q−3}) / (1 − r^{q−1})²`.
///
/// Evaluated as `r^{q−3} · ((1 − r^{q−1}) − (q−1)(1−r)) / (1 − r^{q−1})²` with
/// `1 − r^{q−1}` from `expm1`, which keeps full relative accuracy as `r → 1`
/// where both numerator and denominator vanish.
pub fn g_derivative(q: u32, r: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::SingularInput(r));
    }
    let eps = 1.0 - r;
    let m = f64::from(q - 1);
    let denom = -(m * (-eps).ln_1p()).exp_m1();
    let bracket = denom - m * eps;
    Ok(pow(r, q - 3) * bracket / (denom * denom))
}

/// Outcome of [`g_derivative_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBoundReport {
    pub q: u32,
    pub max_abs_derivative: f64,
    /// Grid point attaining the maximum.
    pub argmax: f64,
    pub holds: bool,
}

/// Checks `|g′(r)| ≤ 1/2` on a uniform grid over `[0, 1 − 10⁻⁶]`.
pub fn g_derivative_bound_check(q: u32, grid_points: usize) -> Result<DerivativeBoundReport> {
    check_q(q)?;
    if grid_points < 100 {
        return Err(Error::InvalidParameter(format!("grid of {grid_points} points is below 100")));
    }
    let upper = 1.0 - GRID_CLAMP;
    let mut max_abs = 0.0;
    let mut argmax = 0.0;
    for i in 0..grid_points {
        let r = upper * i as f64 / (grid_points - 1) as f64;
        let v = g_derivative(q, r)?.abs();
        if v > max_abs {
            max_abs = v;
            argmax = r;
        }
    }
    Ok(DerivativeBoundReport {
        q,
        max_abs_derivative: max_abs,
        argmax,
        holds: max_abs <= 0.5 + DERIVATIVE_SLACK,
    })
}

/// Working precision of [`certify_envelope`], in bits.
pub const CERTIFICATE_PRECISION_BITS: usize = 512;

type BigFloat = FBig<HalfEven, 2>;

fn abs_big(x: BigFloat) -> BigFloat {
    if x < BigFloat::ZERO {
        -x
    } else {
        x
    }
}

/// Outcome of [`certify_envelope`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCertificate {
    pub q: u32,
    pub k_max: usize,
    /// `max_k 2^k |r_k − r_*| / |r_0 − r_*|`; at most 1 when the bound holds.
    pub max_scaled_gap: f64,
    pub first_violation: Option<usize>,
    pub holds: bool,
}

/// Checks `|r_k − r_*| ≤ (1/2)^k |r_0 − r_*|` for `k = 0 … k_max` in
/// [`CERTIFICATE_PRECISION_BITS`]-bit arithmetic.
///
/// In double precision `r_k` settles within an ulp of `r_*` after a few dozen
/// steps while the envelope keeps halving, so the bound cannot be observed
/// beyond `k ≈ 50` with `f64`. The sequence, the fixed point (by bisection to
/// full working precision) and the comparison are all carried out in binary
/// floating point with 512-bit significands, well beyond the `2^{-k_max}`
/// scale being tested.
pub fn certify_envelope(q: u32, k_max: usize) -> Result<EnvelopeCertificate> {
    let (factors, r_star) = precise_sequence(q, k_max)?;
    let two = big(2);
    let gap0 = abs_big(&factors[0] - &r_star);
    let mut scale = big(1);
    let mut max_scaled_gap = 0.0f64;
    let mut first_violation = None;
    for (k, r) in factors.iter().enumerate() {
        if k > 0 {
            scale *= &two;
        }
        let scaled = abs_big(r - &r_star) * &scale;
        if scaled > gap0 && first_violation.is_none() {
            first_violation = Some(k);
        }
        max_scaled_gap = max_scaled_gap.max((scaled / &gap0).to_f64().value());
    }
    Ok(EnvelopeCertificate { q, k_max, max_scaled_gap, first_violation, holds: first_violation.is_none() })
}

/// Factors, gaps `|r_k − r_*|` and envelopes `(1/2)^k |r_0 − r_*|` computed
/// with [`CERTIFICATE_PRECISION_BITS`]-bit arithmetic and rounded to `f64`
/// at the end. Rounding is monotone, so every row where the bound holds
/// exactly also satisfies `gaps[k] ≤ envelopes[k]` as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PreciseFactors {
    pub q: u32,
    pub factors: Vec<f64>,
    pub fixed_point: f64,
    pub gaps: Vec<f64>,
    pub envelopes: Vec<f64>,
}

pub fn precise_factors(q: u32, k_max: usize) -> Result<PreciseFactors> {
    let (factors, r_star) = precise_sequence(q, k_max)?;
    let gap0 = abs_big(&factors[0] - &r_star);
    let two = big(2);
    let mut envelope = gap0;
    let mut out = PreciseFactors {
        q,
        factors: Vec::with_capacity(k_max + 1),
        fixed_point: r_star.to_f64().value(),
        gaps: Vec::with_capacity(k_max + 1),
        envelopes: Vec::with_capacity(k_max + 1),
    };
    for (k, r) in factors.iter().enumerate() {
        if k > 0 {
            envelope /= &two;
        }
        out.factors.push(r.to_f64().value());
        out.gaps.push(abs_big(r - &r_star).to_f64().value());
        out.envelopes.push(envelope.to_f64().value());
    }
    Ok(out)
}

fn big(v: u32) -> BigFloat {
    BigFloat::from(v).with_precision(CERTIFICATE_PRECISION_BITS).value()
}

/// `r_0 … r_{k_max}` and `r_*` in extended precision.
fn precise_sequence(q: u32, k_max: usize) -> Result<(Vec<BigFloat>, BigFloat)> {
    check_q(q)?;
    if k_max + 64 > CERTIFICATE_PRECISION_BITS {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} needs more than {CERTIFICATE_PRECISION_BITS} bits"
        )));
    }
    let one = big(1);
    let two = big(2);
    let power = |r: &BigFloat, n: u32| r.powi(n.into());
    let g = |r: &BigFloat| (&one - power(r, q - 2)) / (&one - power(r, q - 1));

    let (mut lo, mut hi) = (big(0), big(1));
    for _ in 0..CERTIFICATE_PRECISION_BITS + 8 {
        let mid = (&lo + &hi) / &two;
        if power(&mid, q - 1) + power(&mid, q - 2) < one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_star = (lo + hi) / &two;

    let mut factors = Vec::with_capacity(k_max + 1);
    factors.push(big(q - 2) / big(q - 1));
    for k in 1..=k_max {
        let next = g(&factors[k - 1]);
        factors.push(next);
    }
    Ok((factors, r_star))
}
