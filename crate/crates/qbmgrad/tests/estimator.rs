use num_complex::Complex64;
use proptest::prelude::*;
use qbmgrad::densities::{Density, SeededSampler};
use qbmgrad::estimator::*;
use qbmgrad::gradients::{grad, Objective};
use qbmgrad::hermitian::*;
use qbmgrad::model::*;
use qbmgrad::random;

fn small_model(seed: u64, dv: usize, dh: usize) -> (ThermalModel, QuantumState) {
    let mut rng = random::rng(seed);
    let dims = BipartiteDims::new(dv, dh).unwrap();
    let h = random::model(dims, 2, 0.8, &mut rng).unwrap();
    (thermalize(&h).unwrap(), random::state(dv, dv, &mut rng))
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

#[test]
fn dilation_of_a_scalar() {
    let c = CMatrix::from_element(1, 1, Complex64::new(0.6, 0.0));
    let e = dilate(&c, 2.0).unwrap();
    let want = [[0.6, 0.8], [0.8, -0.6]];
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert!((e.unitary[(i, j)] - Complex64::new(*w, 0.0)).norm() < 1e-15);
        }
    }
    assert_eq!((e.alpha, e.ancillas, e.delta), (2.0, 1, 0.0));
    assert!((e.encoded()[(0, 0)].re - 1.2).abs() < 1e-15);
}

#[test]
fn dilation_rejects_expansions() {
    let c = CMatrix::identity(2, 2).scale(1.01);
    assert!(dilate(&c, 1.0).is_err());
    assert!(dilate(&CMatrix::identity(2, 2), f64::NAN).is_err());
}

#[test]
fn product_encoding_multiplies_blocks() {
    let mut rng = random::rng(2);
    let a = random::contraction(3, &mut rng);
    let b = random::contraction(3, &mut rng);
    let ea = BlockEncoding { delta: 0.01, ..dilate(&a, 2.0).unwrap() };
    let eb = BlockEncoding { delta: 0.02, ..dilate(&b, 3.0).unwrap() };
    let p = ea.product(&eb).unwrap();
    assert!(max_abs(&(p.encoded() - (a.scale(2.0) * b.scale(3.0)))) < 1e-13);
    assert!(p.unitarity_defect() < 1e-13);
    assert_eq!(p.ancillas, 2);
    assert!((p.alpha - 6.0).abs() < 1e-15);
    // αε + βδ + δε
    assert!((p.delta - (2.0 * 0.02 + 3.0 * 0.01 + 0.01 * 0.02)).abs() < 1e-15);
}

#[test]
fn modular_flow_of_a_diagonal_state() {
    let dims = BipartiteDims::new(2, 1).unwrap();
    let h = ParamHamiltonian::new(dims, vec![pauli("Z").unwrap()], vec![0.4]).unwrap();
    let m = thermalize(&h).unwrap();
    let p = [(-0.4f64).exp(), 0.4f64.exp()];
    let z = p[0] + p[1];
    let s = 1.3;
    let u = modular_flow(&m, s).unwrap();
    for k in 0..2 {
        let want = Complex64::from_polar(1.0, -0.5 * s * (p[k] / z).ln());
        assert!((u[(k, k)] - want).norm() < 1e-14);
    }
    assert!(u[(0, 1)].norm() < 1e-15);
}

#[test]
fn inverse_square_root_encoding() {
    let (m, _) = small_model(5, 3, 2);
    let e = inv_sqrt_encoding(&m).unwrap();
    assert!((e.alpha - m.kappa().sqrt()).abs() < 1e-14);
    assert!(e.unitarity_defect() < 1e-12);
    let a = e.encoded();
    // (σ^{-1/2})² σ = I
    let check = &a * &a * m.sigma_v().matrix();
    assert!(max_abs(&(check - CMatrix::identity(3, 3))) < 1e-11);
    assert!((op_norm(&inv_sqrt_block(&m).unwrap()) - 1.0).abs() < 1e-12);
}

#[test]
fn hoeffding_shot_counts() {
    assert_eq!(hoeffding_shots(1.0, 1.0, 0.1, 0.05), 738);
    let base = hoeffding_shots(2.0, 1.0, 0.1, 0.05) as f64;
    let half_eps = hoeffding_shots(2.0, 1.0, 0.05, 0.05) as f64;
    let double_k = hoeffding_shots(4.0, 1.0, 0.1, 0.05) as f64;
    assert!((half_eps / base - 4.0).abs() < 0.01);
    assert!((double_k / base - 4.0).abs() < 0.01);
}

#[test]
fn budget_split_spends_half_the_error() {
    for (eps, k, g) in [(0.1, 1.0, 1.0), (0.01, 7.5, 3.0), (0.3, 100.0, 0.2)] {
        let (e1, e2) = budget_split(eps, k, g);
        assert!(e1 > 0.0 && e2 > 0.0);
        assert!((error_budget(e1, e2, k, g) - eps / 2.0).abs() < 1e-14 * eps);
    }
}

#[test]
fn query_costs_scale() {
    let inv = |k| query_cost(CostKind::InvSqrt, k, 0.0, 1.0, 0.01, 0.05);
    assert!((inv(20.0) / inv(10.0) - 2.0).abs() < 1e-12);
    let flow = |s| query_cost(CostKind::ModularFlow, 4.0, s, 1.0, 0.01, 0.05);
    assert!(flow(20.0) > 2.0 * flow(10.0));
    let full = |k| query_cost(CostKind::FullAlgorithm, k, 0.0, 1.0, 0.01, 0.05);
    // κ³ up to logarithms
    let r = full(20.0) / full(10.0);
    assert!(r > 8.0 && r < 9.0, "{r}");
}

#[test]
fn config_validation() {
    assert!(EstimatorConfig::new(0.1, 0.05, 1).validate().is_ok());
    assert!(EstimatorConfig::new(0.0, 0.05, 1).validate().is_err());
    assert!(EstimatorConfig::new(0.1, 1.0, 1).validate().is_err());
    assert!(EstimatorConfig { shots: Some(0), ..EstimatorConfig::new(0.1, 0.05, 1) }.validate().is_err());
}

#[test]
fn averaged_circuit_reproduces_the_first_term() {
    let (m, rho) = small_model(7, 2, 2);
    let exact = grad(&m, &rho, Objective::Umegaki).unwrap();
    let (s_rule, t_rule) = time_rules().unwrap();
    for (j, gj) in m.terms().iter().enumerate() {
        let c = Circuit::new(&m, &rho, gj).unwrap();
        let avg = c.averaged_expectation(&s_rule, &t_rule).unwrap();
        assert!((avg - exact.first_terms[j]).abs() < 1e-10, "{avg} vs {}", exact.first_terms[j]);
        let blocks = first_term_with_blocks(&c, &m, &rho, |s| modular_flow(&m, s), &inv_sqrt_encoding(&m).unwrap().encoded(), &s_rule, &t_rule).unwrap();
        assert!((blocks - exact.first_terms[j]).abs() < 1e-10);
    }
}

#[test]
fn thermal_outcomes_reproduce_the_second_term() {
    let (m, rho) = small_model(8, 2, 3);
    let exact = grad(&m, &rho, Objective::Umegaki).unwrap();
    for (j, gj) in m.terms().iter().enumerate() {
        let c = Circuit::new(&m, &rho, gj).unwrap();
        let (vals, probs) = c.thermal_outcomes();
        let mean: f64 = vals.iter().zip(probs).map(|(v, p)| v * p).sum();
        assert!((mean - exact.second_terms[j]).abs() < 1e-13);
        assert!((c.g_norm() - norms(gj).unwrap().spectral).abs() < 1e-12);
    }
}

#[test]
fn first_term_estimate_is_unbiased() {
    let (m, rho) = small_model(9, 2, 2);
    let exact = grad(&m, &rho, Objective::Umegaki).unwrap();
    let gj = &m.terms()[0];
    let cfg = EstimatorConfig { shots: Some(100_000), ..EstimatorConfig::new(0.05, 0.05, 2024) };
    let est = estimate_first_term(&m, &rho, gj, &cfg).unwrap();
    assert_eq!(est.shots, 100_000);
    assert!((est.mean - exact.first_terms[0]).abs() < 4.0 * est.stderr, "{} ± {}", est.mean, est.stderr);
    let second = estimate_second_term(&m, gj, &cfg).unwrap();
    assert!((second.mean - exact.second_terms[0]).abs() < 4.0 * second.stderr.max(1e-12));
}

#[test]
fn standard_error_shrinks_like_inverse_root_shots() {
    let (m, rho) = small_model(10, 2, 2);
    let gj = &m.terms()[1];
    let at = |n| {
        let cfg = EstimatorConfig { shots: Some(n), ..EstimatorConfig::new(0.05, 0.05, 3) };
        estimate_first_term(&m, &rho, gj, &cfg).unwrap().stderr
    };
    let ratio = at(4_000) / at(16_000);
    assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
}

#[test]
fn estimates_are_reproducible_per_seed() {
    let (m, rho) = small_model(11, 2, 2);
    let cfg = EstimatorConfig { shots: Some(3_000), ..EstimatorConfig::new(0.1, 0.05, 77) };
    let a = estimate_gradient(&m, &rho, &cfg).unwrap();
    let b = estimate_gradient(&m, &rho, &cfg).unwrap();
    assert_eq!(a, b);
    let c = estimate_gradient(&m, &rho, &EstimatorConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a[0].value, c[0].value);
}

#[test]
fn gradient_estimate_is_near_zero_at_a_fixed_point() {
    let mut rng = random::rng(12);
    let dims = BipartiteDims::new(2, 1).unwrap();
    let h = random::model(dims, 2, 0.5, &mut rng).unwrap();
    let m = thermalize(&h).unwrap();
    let rho = m.sigma_v().clone();
    let cfg = EstimatorConfig { shots: Some(40_000), ..EstimatorConfig::new(0.1, 0.05, 5) };
    for e in estimate_gradient(&m, &rho, &cfg).unwrap() {
        assert!(e.value.abs() < 4.0 * e.stderr, "{} ± {}", e.value, e.stderr);
    }
}

#[test]
fn perturbed_encodings_stay_within_budget() {
    let (m, rho) = small_model(13, 2, 2);
    let c = Circuit::new(&m, &rho, &m.terms()[0]).unwrap();
    let rules = time_rules().unwrap();
    let mut rng = random::rng(14);
    let (e1, e2) = budget_split(0.1, m.kappa(), c.g_norm());
    for s in [0.0, 0.8, -2.0] {
        let t = perturbation_trial(&c, &m, &rho, e1, e2, s, &rules, &mut rng).unwrap();
        assert!(t.product_deviation <= t.product_bound * (1.0 + 1e-9));
        assert!(t.bias.abs() <= t.budget);
        assert!((t.budget - 0.05).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilations_are_unitary(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = random::rng(seed);
        let c = random::contraction(d, &mut rng);
        let e = dilate(&c, 1.0).unwrap();
        prop_assert!(e.unitarity_defect() < 1e-12);
        prop_assert!(max_abs(&(e.block() - &c)) < 1e-15);
    }

    #[test]
    fn modular_flow_is_a_one_parameter_group(seed in any::<u64>(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let (m, _) = small_model(seed, 3, 2);
        let us = modular_flow(&m, s).unwrap();
        let ut = modular_flow(&m, t).unwrap();
        let ust = modular_flow(&m, s + t).unwrap();
        prop_assert!(max_abs(&(&us * &ut - ust)) < 1e-12);
        prop_assert!(max_abs(&(us.adjoint() * &us - CMatrix::identity(3, 3))) < 1e-12);
        prop_assert!(modular_unitary(&m, s).unwrap().unitarity_defect() < 1e-12);
    }

    #[test]
    fn register_and_contracted_outcomes_agree(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let (m, rho) = small_model(seed, 2, 2);
        let c = Circuit::new(&m, &rho, &m.terms()[0]).unwrap();
        let (e1, e2) = c.exact_encodings(&m, s).unwrap();
        let front = c.front_state(&e1, &e2).unwrap();
        let slow = c.register_outcomes(&front, t);
        let fast = c.outcomes(s, t);
        prop_assert_eq!(slow.len(), fast.len());
        let mut mass = 0.0;
        let mut mean = 0.0;
        for (a, b) in slow.iter().zip(&fast) {
            prop_assert_eq!((a.z, a.accepted), (b.z, b.accepted));
            prop_assert!((a.prob - b.prob).abs() < 1e-12);
            prop_assert!(b.prob > -1e-12);
            mass += b.prob;
            mean += b.prob * b.y();
        }
        prop_assert!((mass - 1.0).abs() < 1e-12);
        // κ E[Y] is the circuit expectation
        prop_assert!((c.kappa() * mean - c.expectation(s, t).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn shot_outcomes_are_bounded(seed in any::<u64>()) {
        let (m, rho) = small_model(seed, 2, 2);
        let gj = &m.terms()[1];
        let c = Circuit::new(&m, &rho, gj).unwrap();
        let mut ss = SeededSampler::new(Density::Logistic, seed).unwrap();
        let mut st = SeededSampler::new(Density::HighPeakTent, seed ^ 1).unwrap();
        let mut rng = random::rng(seed);
        for _ in 0..50 {
            let r = c.sample(&mut ss, &mut st, &mut rng).unwrap();
            prop_assert!(r.y.abs() <= c.g_norm() + 1e-12);
            prop_assert!(r.accepted || r.y == 0.0);
        }
    }

    #[test]
    fn budget_split_is_exact(eps in 1e-3f64..1.0, k in 1.0f64..1e3, g in 1e-2f64..10.0) {
        let (e1, e2) = budget_split(eps, k, g);
        prop_assert!((error_budget(e1, e2, k, g) - eps / 2.0).abs() < 1e-12 * eps);
    }

    #[test]
    fn be_product_is_associative_in_alpha_and_ancillas(a in 0.5f64..4.0, b in 0.5f64..4.0, c in 0.5f64..4.0, d in 0.0f64..0.1) {
        let m = |alpha, delta| EncodingMeta { alpha, ancillas: 1, delta };
        let left = be_product(be_product(m(a, d), m(b, d)), m(c, d));
        let right = be_product(m(a, d), be_product(m(b, d), m(c, d)));
        prop_assert!((left.alpha - right.alpha).abs() < 1e-12);
        prop_assert_eq!(left.ancillas, right.ancillas);
        prop_assert!((left.delta - right.delta).abs() < 1e-12);
    }
}
