use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qnrate_bench::{pow_norm_instance, start_point};
use qnrate_core::glm_sim::generate_dataset;
use qnrate_core::rate::{certify_envelope, contraction_sequence};
use qnrate_core::solvers::{default_initial_inverse, run_bfgs, run_gd_constant, run_newton};
use qnrate_core::{DVector, GlmModelConfig, Method, Objective, SolverConfig};

const DIMS: [usize; 3] = [10, 50, 200];
const ITERS: usize = 20;

fn solver_iterations(c: &mut Criterion) {
    let mut group = c.benchmark_group("pow_norm_20_iterations");
    for d in DIMS {
        let f = pow_norm_instance(2 * d, d, 4);
        let theta0 = start_point(d);
        let theta_hat = f.theta_hat().clone();
        let h0 = default_initial_inverse(&f, &theta0);

        let gd = SolverConfig::new(Method::GdConstant).with_step_size(1e-6).with_max_iters(ITERS);
        group.bench_with_input(BenchmarkId::new("gd-constant", d), &d, |b, _| {
            b.iter(|| run_gd_constant(&f, black_box(&theta0), &gd, &theta_hat).unwrap())
        });
        let newton = SolverConfig::new(Method::Newton).with_max_iters(ITERS);
        group.bench_with_input(BenchmarkId::new("newton", d), &d, |b, _| {
            b.iter(|| run_newton(&f, black_box(&theta0), &newton, &theta_hat).unwrap())
        });
        let bfgs = SolverConfig::new(Method::Bfgs).with_max_iters(ITERS);
        group.bench_with_input(BenchmarkId::new("bfgs", d), &d, |b, _| {
            b.iter(|| run_bfgs(&f, black_box(&theta0), &h0, &bfgs, &theta_hat).unwrap())
        });
    }
    group.finish();
}

fn hessian_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("pow_norm_hessian_inverse");
    for d in DIMS {
        let f = pow_norm_instance(2 * d, d, 6);
        let theta = start_point(d);
        group.bench_with_input(BenchmarkId::new("closed-form", d), &d, |b, _| {
            b.iter(|| f.hessian_inverse(black_box(&theta)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lu", d), &d, |b, _| {
            b.iter(|| f.hessian(black_box(&theta)).unwrap().lu().try_inverse().unwrap())
        });
    }
    group.finish();
}

fn contraction_factors(c: &mut Criterion) {
    c.bench_function("contraction_sequence_q10_k200", |b| {
        b.iter(|| contraction_sequence(black_box(10), 200).unwrap())
    });
    c.bench_function("certify_envelope_q10_k200", |b| b.iter(|| certify_envelope(black_box(10), 200).unwrap()));
}

fn glm_gradient(c: &mut Criterion) {
    let config = GlmModelConfig::high_snr(4, 2, 7);
    let loss = generate_dataset(&config, 10_000, 11).unwrap();
    let theta = DVector::from_element(4, 0.3);
    c.bench_function("glm_gradient_n10000_d4", |b| b.iter(|| loss.gradient(black_box(&theta)).unwrap()));
}

criterion_group!(benches, solver_iterations, hessian_inverse, contraction_factors, glm_gradient);
criterion_main!(benches);
