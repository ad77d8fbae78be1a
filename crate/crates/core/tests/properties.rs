//! Property-based checks of the structural invariants.

mod common;

use common::instance;
use proptest::prelude::*;
use qnrate_core::glm_sim::rng::{derive_seed, GaussianStream};
use qnrate_core::glm_sim::stats::{median, quantile};
use qnrate_core::glm_sim::{generate_dataset, GlmModelConfig};
use qnrate_core::linalg::asymmetry;
use qnrate_core::rate::{certify_envelope, contraction_sequence, fixed_point, g_map, newton_factor};
use qnrate_core::solvers::{run_bfgs, run_newton, BfgsState};
use qnrate_core::{DMatrix, DVector, LowSnrPopulationLoss, Method, Objective, SolverConfig};

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemma_one_inverse_is_exact(seed in any::<u64>(), d in 1usize..8, q in 4u32..12, shift in vector(8)) {
        let inst = instance(2 * d + 1, d, q, seed);
        let obj = &inst.objective;
        let theta = obj.theta_hat() + DVector::from_column_slice(&shift[..d]);
        prop_assume!(obj.residual(&theta).unwrap().norm() >= 1e-6);
        let h = obj.hessian(&theta).unwrap();
        let inv = obj.hessian_inverse(&theta).unwrap();
        // Scale-free: both factors carry ‖r‖^{±(q−2)}.
        prop_assert!((&inv * &h - DMatrix::identity(d, d)).amax() <= 1e-8);
        prop_assert_eq!(&h, &h.transpose());
        prop_assert!(asymmetry(&inv) == 0.0);
    }

    #[test]
    fn pow_norm_is_realizable(seed in any::<u64>(), d in 1usize..8, q in 4u32..12) {
        let inst = instance(2 * d, d, q, seed);
        let obj = &inst.objective;
        prop_assert!(obj.value(obj.theta_hat()).unwrap() <= 1e-12);
        prop_assert!(obj.gradient(obj.theta_hat()).unwrap().amax() <= 1e-12);
        prop_assert!(obj.value(&inst.theta0).unwrap() >= 0.0);
    }

    #[test]
    fn population_loss_is_even(entries in vector(9), theta in vector(3), p in 2u32..6, var in 0.0..3.0f64) {
        let root = DMatrix::from_column_slice(3, 3, &entries);
        let loss = LowSnrPopulationLoss::new(root, p, var).unwrap();
        let t = DVector::from_vec(theta);
        prop_assert_eq!(loss.value(&t).unwrap(), loss.value(&(-&t)).unwrap());
        prop_assert_eq!(loss.value(&DVector::zeros(3)).unwrap(), var);
    }

    #[test]
    fn glm_loss_is_non_negative(seed in any::<u64>(), theta in vector(3), p in 2u32..5) {
        let mut s = GaussianStream::new(seed);
        let loss = common::random_dataset(&mut s, 20, 3, p);
        prop_assert!(loss.value(&DVector::from_vec(theta)).unwrap() >= 0.0);
    }

    #[test]
    fn bfgs_update_keeps_symmetry_and_secant(seed in any::<u64>(), d in 1usize..10) {
        let mut s = GaussianStream::new(seed);
        let b = DMatrix::from_row_slice(d, d, &s.normals(d * d));
        let h0 = &b * b.transpose() + DMatrix::identity(d, d);
        let theta = DVector::from_vec(s.normals(d));
        let grad = DVector::from_vec(s.normals(d));
        let mut state = BfgsState::new(theta.clone(), grad.clone(), h0).unwrap();
        for _ in 0..10 {
            let step = DVector::from_vec(s.normals(d));
            let spd = DMatrix::from_row_slice(d, d, &s.normals(d * d));
            let curv = &spd * spd.transpose() + DMatrix::identity(d, d);
            let u = &curv * &step;
            let next_theta = &state.theta + &step;
            let next_grad = &state.grad + &u;
            state.update(next_theta, next_grad).unwrap();
            let scale = state.h_matrix.amax().max(1.0);
            prop_assert!(asymmetry(&state.h_matrix) <= 1e-10 * scale);
            prop_assert!(state.secant_residual(&step, &u) <= 1e-8 * step.norm() * scale);
        }
    }

    #[test]
    fn newton_contracts_by_constant_factor(seed in any::<u64>(), d in 1usize..6, q in 4u32..9) {
        let inst = instance(2 * d, d, q, seed);
        let obj = &inst.objective;
        let trace = run_newton(obj, &inst.theta0, &SolverConfig::new(Method::Newton).with_max_iters(15), obj.theta_hat()).unwrap();
        let f = newton_factor(q).unwrap();
        for r in trace.error_ratios() {
            prop_assert!(((r - f) / f).abs() <= 1e-8);
        }
    }

    #[test]
    fn bfgs_tracks_theory(seed in any::<u64>(), d in 1usize..6, q in 4u32..9) {
        let inst = instance(2 * d, d, q, seed);
        let obj = &inst.objective;
        let h0 = obj.hessian_inverse(&inst.theta0).unwrap();
        let trace = run_bfgs(obj, &inst.theta0, &h0, &SolverConfig::new(Method::Bfgs).with_max_iters(10), obj.theta_hat()).unwrap();
        let seq = contraction_sequence(q, 10).unwrap();
        for (k, r) in trace.error_ratios().into_iter().enumerate() {
            prop_assert!(((r - seq.factors[k]) / seq.factors[k]).abs() <= 1e-6);
        }
    }

    #[test]
    fn dataset_generation_is_deterministic(seed in any::<u64>(), n in 1usize..50, d in 1usize..5) {
        let cfg = GlmModelConfig::high_snr(d, 2, seed ^ 1);
        let a = generate_dataset(&cfg, n, seed).unwrap();
        let b = generate_dataset(&cfg, n, seed).unwrap();
        prop_assert_eq!(a.design(), b.design());
        prop_assert_eq!(a.responses(), b.responses());
    }

    #[test]
    fn even_link_hides_the_sign(seed in any::<u64>(), n in 1usize..50, d in 1usize..5, p in prop::sample::select(vec![2u32, 4])) {
        let cfg = GlmModelConfig::high_snr(d, p, seed);
        let mut flipped = cfg.clone();
        flipped.theta_star = -&cfg.theta_star;
        let a = generate_dataset(&cfg, n, seed).unwrap();
        let b = generate_dataset(&flipped, n, seed).unwrap();
        prop_assert_eq!(a.responses(), b.responses());
    }

    #[test]
    fn quantiles_bracket_median(values in prop::collection::vec(-1e3..1e3f64, 1..60)) {
        let (lo, mid, hi) = (quantile(&values, 0.25), median(&values), quantile(&values, 0.75));
        prop_assert!(lo <= mid && mid <= hi);
    }

    #[test]
    fn derived_seeds_differ(base in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(base, &[a]), derive_seed(base, &[b]));
    }
}

#[test]
fn contraction_envelope_and_recursion() {
    for q in 4..=64 {
        let seq = contraction_sequence(q, 200).unwrap();
        assert_eq!(seq.factors[0], f64::from(q - 2) / f64::from(q - 1));
        for k in 0..=200 {
            let r = seq.factors[k];
            assert!((0.0..1.0).contains(&r));
            // Double precision resolves the envelope only while it exceeds
            // a few ulps of r_*.
            if seq.envelope(k) > 8.0 * f64::EPSILON {
                assert!((r - seq.fixed_point).abs() <= seq.envelope(k), "q {q} k {k}");
            }
            if k < 200 {
                assert_eq!(seq.factors[k + 1], g_map(q, r).unwrap());
            }
        }
    }
}

#[test]
fn envelope_certified_in_extended_precision() {
    for q in 4..=64 {
        let cert = certify_envelope(q, 200).unwrap();
        assert!(cert.holds, "{cert:?}");
    }
}

#[test]
fn ordering_and_residual() {
    for q in 4..=100 {
        let r = fixed_point(q).unwrap();
        assert!(newton_factor(q).unwrap() < r && r < 1.0);
        let qi = q as i32;
        assert!((r.powi(qi - 1) + r.powi(qi - 2) - 1.0).abs() <= 1e-10);
        assert_eq!(g_map(q, 0.0).unwrap(), 1.0);
        assert!((g_map(q, r).unwrap() - r).abs() <= 1e-10);
    }
}
