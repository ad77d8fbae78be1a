//! Fixtures shared by the criterion benchmarks.

use nalgebra::{DMatrix, DVector};
use qnrate_core::PowNormObjective;

/// Deterministic well-conditioned `m × d` pow-norm instance.
pub fn pow_norm_instance(m: usize, d: usize, q: u32) -> PowNormObjective {
    let a = DMatrix::from_fn(m, d, |i, j| {
        let x = ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5;
        if i == j { x + 3.0 } else { x }
    });
    let theta_hat = DVector::from_fn(d, |i, _| (i as f64 * 0.3).cos());
    PowNormObjective::new(a, theta_hat, q).expect("diagonally dominant instance")
}

pub fn start_point(d: usize) -> DVector<f64> {
    DVector::from_fn(d, |i, _| (i as f64 * 0.7).sin() + 1.5)
}
