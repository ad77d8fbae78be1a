//! Central finite differences, used as independent derivative oracles.

use nalgebra::{DMatrix, DVector};

/// Default step for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Central-difference gradient of a scalar function.
pub fn gradient<F>(f: F, theta: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut probe = theta.clone();
    DVector::from_iterator(
        theta.len(),
        (0..theta.len()).map(|i| {
            let x = theta[i];
            probe[i] = x + h;
            let up = f(&probe);
            probe[i] = x - h;
            let down = f(&probe);
            probe[i] = x;
            (up - down) / (2.0 * h)
        }),
    )
}

/// Central-difference Jacobian of a vector function; column `j` holds the
/// derivative with respect to `θ_j`.
pub fn jacobian<F>(g: F, theta: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let d = theta.len();
    let mut probe = theta.clone();
    let mut jac = DMatrix::zeros(g(theta).len(), d);
    for j in 0..d {
        let x = theta[j];
        probe[j] = x + h;
        let up = g(&probe);
        probe[j] = x - h;
        let down = g(&probe);
        probe[j] = x;
        jac.set_column(j, &((up - down) / (2.0 * h)));
    }
    jac
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn relative_error(a: &DVector<f64>, b: &DVector<f64>, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn polynomial_gradient() {
        let g = gradient(|x| x[0].powi(3) + 2.0 * x[1], &dvector![1.0, 5.0], FD_STEP);
        assert!((g[0] - 3.0).abs() < 1e-8);
        assert!((g[1] - 2.0).abs() < 1e-8);
    }
}
