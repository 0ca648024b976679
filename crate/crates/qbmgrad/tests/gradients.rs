use proptest::prelude::*;
use qbmgrad::gradients::*;
use qbmgrad::hermitian::*;
use qbmgrad::model::*;
use qbmgrad::random;
use qbmgrad::Error;

/// Central difference of `θ ↦ D(ρ‖σ_v(θ))`, built from scratch.
fn fd_quantum(h: &ParamHamiltonian, rho: &QuantumState, obj: Objective, step: f64) -> Vec<f64> {
    let f = |theta: &[f64]| {
        let g = h.with_theta(theta).unwrap().hamiltonian();
        let e = matrix_function(&eigh(&g).unwrap(), |l| (-l).exp()).unwrap();
        let svh = e.scale(1.0 / e.trace());
        let sv = partial_trace(&svh, h.dims, Subsystem::Visible).unwrap();
        relative_entropy(rho, &QuantumState::new(sv).unwrap(), obj).unwrap()
    };
    (0..h.num_params())
        .map(|j| {
            let (mut up, mut down) = (h.theta.clone(), h.theta.clone());
            up[j] += step;
            down[j] -= step;
            (f(&up) - f(&down)) / (2.0 * step)
        })
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

#[test]
fn single_register_gradient_is_a_moment_difference() {
    // with no hidden register the gradient is Tr[ρG_j] − Tr[σG_j]
    let mut rng = random::rng(3);
    let dims = BipartiteDims::new(3, 1).unwrap();
    let h = random::model(dims, 4, 1.0, &mut rng).unwrap();
    let rho = random::state(3, 3, &mut rng);
    let m = thermalize(&h).unwrap();
    let r = grad(&m, &rho, Objective::Umegaki).unwrap();
    for (j, gj) in h.terms.iter().enumerate() {
        let want = expectation(gj, &rho).unwrap() - expectation(gj, m.sigma_vh()).unwrap();
        assert!((r.values[j] - want).abs() < 1e-12);
    }
}

#[test]
fn one_qubit_gradient_is_tanh_difference() {
    // G = θZ, ρ = |0⟩⟨0|: ∂D = 1 − (−tanh θ)
    let dims = BipartiteDims::new(2, 1).unwrap();
    for theta in [-1.0, 0.0, 0.7] {
        let h = ParamHamiltonian::new(dims, vec![pauli("Z").unwrap()], vec![theta]).unwrap();
        let rho = QuantumState::diagonal(&[1.0, 0.0]).unwrap();
        let r = grad(&thermalize(&h).unwrap(), &rho, Objective::Umegaki).unwrap();
        assert!((r.values[0] - (1.0 + f64::tanh(theta))).abs() < 1e-14);
    }
}

#[test]
fn gradient_vanishes_at_a_realizable_target() {
    let mut rng = random::rng(8);
    let dims = BipartiteDims::new(2, 2).unwrap();
    let h = random::model(dims, 3, 1.0, &mut rng).unwrap();
    let m = thermalize(&h).unwrap();
    let rho = m.sigma_v().clone();
    for obj in [Objective::Umegaki, Objective::PetzTsallis(0.5), Objective::PetzTsallis(1.7)] {
        let r = grad(&m, &rho, obj).unwrap();
        assert!(r.norm() < 1e-10, "{obj:?}: {}", r.norm());
        assert!(relative_entropy(&rho, m.sigma_v(), obj).unwrap().abs() < 1e-12);
    }
}

#[test]
fn tsallis_reports_the_overlap() {
    let mut rng = random::rng(11);
    let dims = BipartiteDims::new(2, 2).unwrap();
    let m = thermalize(&random::model(dims, 2, 1.0, &mut rng).unwrap()).unwrap();
    let rho = random::state(2, 2, &mut rng);
    let q = 1.5;
    let r = grad(&m, &rho, Objective::PetzTsallis(q)).unwrap();
    let want = quasi_overlap(&rho, m.sigma_v(), q).unwrap();
    assert!((r.q_value.unwrap() - want).abs() < 1e-14);
    assert!(grad(&m, &rho, Objective::Umegaki).unwrap().q_value.is_none());
}

#[test]
fn objective_validation() {
    assert!(Objective::PetzTsallis(1.0).validate().is_err());
    assert!(Objective::PetzTsallis(0.0).validate().is_err());
    assert!(Objective::PetzTsallis(2.5).validate().is_err());
    assert!(Objective::PetzTsallis(2.0).validate().is_ok());
}

#[test]
fn rank_deficient_model_is_rejected() {
    let dims = BipartiteDims::new(2, 1).unwrap();
    let h = ParamHamiltonian::new(dims, vec![pauli("Z").unwrap()], vec![40.0]).unwrap();
    let rho = QuantumState::maximally_mixed(2);
    let err = grad(&thermalize(&h).unwrap(), &rho, Objective::Umegaki).unwrap_err();
    assert!(matches!(err, Error::Support(_)));
}

#[test]
fn qc_gradient_matches_full_gradient() {
    let mut rng = random::rng(21);
    let dims = BipartiteDims::new(2, 3).unwrap();
    let basis = random::unitary(3, &mut rng);
    let h = random::qc_model(dims, 3, 1.0, &basis, &mut rng).unwrap();
    let rho = random::state(2, 2, &mut rng);
    let qc = qc_decompose(&h, &basis).unwrap();
    for obj in [Objective::Umegaki, Objective::PetzTsallis(0.6)] {
        let a = grad_qc(&qc, &rho, obj).unwrap();
        let b = grad(&thermalize(&h).unwrap(), &rho, obj).unwrap();
        assert!(close(&a.values, &b.values, 1e-10));
    }
}

#[test]
fn qc_objective_matches_pgm_measurement_of_the_model() {
    let mut rng = random::rng(22);
    let dims = BipartiteDims::new(2, 2).unwrap();
    let basis = identity_basis(2);
    let h = random::qc_model(dims, 2, 1.0, &basis, &mut rng).unwrap();
    let qc = qc_decompose(&h, &basis).unwrap();
    let povm = pgm_povm(&qc).unwrap();
    let mut sum = HermitianOperator::zeros(2);
    for e in &povm.elements {
        assert!(eigh(e).unwrap().min() > -1e-12);
        sum = sum.add(e);
    }
    assert!(sum.max_abs_diff(&HermitianOperator::identity(2)) < 1e-12);
    let probs = povm_probs(&povm, qc.sigma_v()).unwrap();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn cq_gradient_matches_full_gradient_of_the_embedded_target() {
    let mut rng = random::rng(31);
    let dims = BipartiteDims::new(3, 2).unwrap();
    let basis = random::unitary(3, &mut rng);
    let h = random::cq_model(dims, 3, 1.0, &basis, &mut rng).unwrap();
    let cq = cq_decompose(&h, &basis).unwrap();
    let r = random::distribution(3, &mut rng);
    let rho = cq.target_state(&r).unwrap();
    for obj in [Objective::Umegaki, Objective::PetzTsallis(1.4)] {
        let a = grad_cq(&cq, &r, obj).unwrap();
        let b = grad(&thermalize(&h).unwrap(), &rho, obj).unwrap();
        assert!(close(&a.values, &b.values, 1e-10));
    }
}

#[test]
fn classical_gradient_matches_finite_differences() {
    let mut rng = random::rng(41);
    let bm = random::classical(3, 2, 4, 1.0, &mut rng).unwrap();
    let target = random::distribution(3, &mut rng);
    let g = classical_gradient(&bm, &target).unwrap();
    let step = 1e-5;
    for j in 0..bm.num_params() {
        let (mut up, mut down) = (bm.theta.clone(), bm.theta.clone());
        up[j] += step;
        down[j] -= step;
        let fu = classical_objective(&bm.with_theta(&up), &target, Objective::Umegaki).unwrap();
        let fd = classical_objective(&bm.with_theta(&down), &target, Objective::Umegaki).unwrap();
        assert!((g[j] - (fu - fd) / (2.0 * step)).abs() < 1e-8);
    }
}

#[test]
fn restricted_grads_reshape_the_packed_gradient() {
    let mut rng = random::rng(51);
    let spec = random::restricted(2, 2, 2, 1, 0.5, &mut rng);
    let h = restricted_to_param(&spec).unwrap();
    let rho = random::state(2, 2, &mut rng);
    let packed = grad(&thermalize(&h).unwrap(), &rho, Objective::Umegaki).unwrap();
    let shaped = restricted_grads(&RestrictedKind::FullyQuantum, &spec, &Target::State(rho), Objective::Umegaki).unwrap();
    let (a, b, w) = spec.unpack(&packed.values);
    assert_eq!((a, b, w), (shaped.a, shaped.b, shaped.w));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn umegaki_gradient_matches_finite_differences(seed in any::<u64>(), dv in 2usize..4, dh in 1usize..4) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(dv, dh).unwrap();
        let h = random::model(dims, 3, 1.0, &mut rng).unwrap();
        let rho = random::state(dv, dv, &mut rng);
        let r = grad(&thermalize(&h).unwrap(), &rho, Objective::Umegaki).unwrap();
        let fd = fd_quantum(&h, &rho, Objective::Umegaki, 1e-5);
        prop_assert!(close(&r.values, &fd, 1e-6), "{:?} vs {:?}", r.values, fd);
    }

    #[test]
    fn tsallis_gradient_matches_finite_differences(seed in any::<u64>(), q in prop::sample::select(vec![0.3, 0.8, 1.3, 2.0])) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(2, 2).unwrap();
        let h = random::model(dims, 3, 1.0, &mut rng).unwrap();
        let rho = random::state(2, 2, &mut rng);
        let obj = Objective::PetzTsallis(q);
        let r = grad(&thermalize(&h).unwrap(), &rho, obj).unwrap();
        let fd = fd_quantum(&h, &rho, obj, 1e-5);
        prop_assert!(close(&r.values, &fd, 1e-6), "{:?} vs {:?}", r.values, fd);
    }

    #[test]
    fn gradient_terms_are_bounded_by_term_norms(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(2, 2).unwrap();
        let h = random::model(dims, 3, 2.0, &mut rng).unwrap();
        let rho = random::state(2, 1, &mut rng);
        let m = thermalize(&h).unwrap();
        let r = grad(&m, &rho, Objective::Umegaki).unwrap();
        for (j, gj) in h.terms.iter().enumerate() {
            let n = norms(gj).unwrap().spectral;
            prop_assert!(r.second_terms[j].abs() <= n + 1e-12);
            prop_assert!(r.first_terms[j].abs() <= n + 1e-9);
        }
    }

    #[test]
    fn divergences_are_nonnegative(seed in any::<u64>(), q in prop::sample::select(vec![0.5, 1.5])) {
        let mut rng = random::rng(seed);
        let rho = random::state(3, 2, &mut rng);
        let sigma = random::state(3, 3, &mut rng);
        for obj in [Objective::Umegaki, Objective::PetzTsallis(q)] {
            if let Ok(d) = relative_entropy(&rho, &sigma, obj) {
                prop_assert!(d >= -1e-12);
            }
        }
    }
}
