#![allow(dead_code)]

use qnrate_core::glm_sim::rng::GaussianStream;
use qnrate_core::objectives::{sample_instance, PowNormInstance};
use qnrate_core::{DMatrix, DVector, EmpiricalGlmLoss};

/// Random pow-norm instance with `κ_A ≤ 100`.
pub fn instance(m: usize, d: usize, q: u32, seed: u64) -> PowNormInstance {
    sample_instance(m, d, q, seed, 100.0, 50).expect("well-conditioned instance")
}

/// Vector with entries uniform in `[-r, r]`.
pub fn uniform_vector(stream: &mut GaussianStream, d: usize, r: f64) -> DVector<f64> {
    DVector::from_iterator(d, (0..d).map(|_| r * (2.0 * stream.uniform() - 1.0)))
}

pub fn uniform_matrix(stream: &mut GaussianStream, m: usize, d: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_iterator(m, d, (0..m * d).map(|_| r * (2.0 * stream.uniform() - 1.0)))
}

/// Dataset with features and responses uniform in `[-2, 2]`.
pub fn random_dataset(stream: &mut GaussianStream, n: usize, d: usize, p: u32) -> EmpiricalGlmLoss {
    let xs = (0..n).map(|_| uniform_vector(stream, d, 2.0)).collect();
    let ys = (0..n).map(|_| 2.0 * (2.0 * stream.uniform() - 1.0)).collect();
    EmpiricalGlmLoss::new(xs, ys, p).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
