use crate::error::{Error, Result};
use crate::objectives::{EmpiricalGlmLoss, Objective};

/// `Σ Y_i X_i^p / Σ X_i^{2p}` for a one-dimensional sample loss; any non-zero
/// stationary point `θ` satisfies `θ^p` equal to it.
pub fn moment_ratio(loss: &EmpiricalGlmLoss) -> Result<f64> {
    if loss.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: loss.dim() });
    }
    let p = loss.p() as i32;
    let xs = loss.design().column(0);
    let denom: f64 = xs.iter().map(|x| x.powi(2 * p)).sum();
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter("all features are zero".into()));
    }
    let numer: f64 = xs.iter().zip(loss.responses().iter()).map(|(x, y)| y * x.powi(p)).sum();
    Ok(numer / denom)
}

/// Minimizer `θ_n*` of a one-dimensional sample loss.
///
/// Odd `p` takes the real `p`-th root of [`moment_ratio`]. Even `p` with a
/// positive ratio has two symmetric minimizers and returns the one whose sign
/// matches `sign_hint` (non-negative hints pick `+`); a non-positive ratio
/// leaves the origin as the only stationary point.
pub fn empirical_optimum_scalar(loss: &EmpiricalGlmLoss, sign_hint: f64) -> Result<f64> {
    let ratio = moment_ratio(loss)?;
    let inv_p = 1.0 / f64::from(loss.p());
    if loss.p() % 2 == 1 {
        return Ok(ratio.signum() * ratio.abs().powf(inv_p));
    }
    if ratio <= 0.0 {
        return Ok(0.0);
    }
    let root = ratio.powf(inv_p);
    Ok(if sign_hint < 0.0 { -root } else { root })
}

/// `|Σ Y_i X_i^p / Σ X_i^{2p}|^{1/p}`: the magnitude of `θ_n*` whenever the
/// ratio has a real root, and the radius scale of the loss otherwise.
pub fn radius_scale(loss: &EmpiricalGlmLoss) -> Result<f64> {
    Ok(moment_ratio(loss)?.abs().powf(1.0 / f64::from(loss.p())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn data(theta_star: f64, p: u32) -> EmpiricalGlmLoss {
        let xs: Vec<_> = (1..30).map(|i| dvector![(i as f64 * 0.41).cos() * 1.7]).collect();
        let ys = xs.iter().map(|x| (x[0] * theta_star).powi(p as i32)).collect();
        EmpiricalGlmLoss::new(xs, ys, p).unwrap()
    }

    #[test]
    fn noiseless_optimum_recovers_truth() {
        let l = data(0.5, 2);
        assert!((empirical_optimum_scalar(&l, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((empirical_optimum_scalar(&l, -1.0).unwrap() + 0.5).abs() < 1e-14);
        let l = data(-0.5, 3);
        assert!((empirical_optimum_scalar(&l, 1.0).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_responses_give_origin() {
        assert_eq!(empirical_optimum_scalar(&data(0.0, 2), 1.0).unwrap(), 0.0);
        assert_eq!(empirical_optimum_scalar(&data(0.0, 3), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_ratio_with_even_link() {
        let l = EmpiricalGlmLoss::new(vec![dvector![1.0], dvector![2.0]], vec![-1.0, -1.0], 2).unwrap();
        assert_eq!(empirical_optimum_scalar(&l, 1.0).unwrap(), 0.0);
        assert!(radius_scale(&l).unwrap() > 0.0);
    }

    #[test]
    fn all_zero_features_rejected() {
        let l = EmpiricalGlmLoss::new(vec![dvector![0.0]; 3], vec![1.0; 3], 2).unwrap();
        assert!(empirical_optimum_scalar(&l, 1.0).is_err());
    }

    #[test]
    fn optimum_is_stationary() {
        let xs: Vec<_> = (1..40).map(|i| dvector![(i as f64 * 1.3).sin()]).collect();
        let ys: Vec<_> = (1..40).map(|i| (i as f64 * 0.7).cos()).collect();
        for p in [2u32, 3] {
            let l = EmpiricalGlmLoss::new(xs.clone(), ys.clone(), p).unwrap();
            let t = empirical_optimum_scalar(&l, 1.0).unwrap();
            let g = l.gradient(&dvector![t]).unwrap()[0];
            assert!(g.abs() < 1e-12, "p={p}: {g}");
        }
    }
}
