use proptest::prelude::*;
use qbmgrad::hermitian::*;
use qbmgrad::model::*;
use qbmgrad::random;
use qbmgrad::Error;

#[test]
fn thermal_state_of_a_diagonal_hamiltonian() {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let terms = vec![HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.0, 3.0])];
    let m = thermalize(&ParamHamiltonian::new(dims, terms, vec![1.0]).unwrap()).unwrap();
    let z: f64 = (0..4).map(|k| (-(k as f64)).exp()).sum();
    assert!((m.partition_function() - z).abs() < 1e-14);
    let pv = [(1.0 + (-1.0f64).exp()) / z, ((-2.0f64).exp() + (-3.0f64).exp()) / z];
    assert!(m.sigma_v().op().max_abs_diff(&HermitianOperator::from_real_diagonal(&pv)) < 1e-15);
    assert!((m.kappa() - 1.0 / pv[1]).abs() < 1e-12);
}

#[test]
fn construction_errors() {
    let dims = BipartiteDims::new(2, 1).unwrap();
    let z = pauli("Z").unwrap();
    assert!(ParamHamiltonian::new(dims, vec![], vec![]).is_err());
    assert!(ParamHamiltonian::new(dims, vec![z.clone()], vec![1.0, 2.0]).is_err());
    assert!(ParamHamiltonian::new(dims, vec![z.clone()], vec![f64::NAN]).is_err());
    assert!(matches!(ParamHamiltonian::new(dims, vec![pauli("ZZ").unwrap()], vec![1.0]), Err(Error::Dimension(_))));
    let big = ParamHamiltonian::new(dims, vec![z], vec![800.0]).unwrap();
    assert!(matches!(thermalize(&big), Err(Error::Numerical(_))));
}

#[test]
fn qc_rejects_terms_that_are_not_block_diagonal() {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let h = ParamHamiltonian::new(dims, vec![pauli("XX").unwrap()], vec![0.3]).unwrap();
    assert!(matches!(qc_decompose(&h, &identity_basis(2)), Err(Error::Structure(_))));
    assert!(matches!(cq_decompose(&h, &identity_basis(2)), Err(Error::Structure(_))));
}

#[test]
fn restricted_bits_energies() {
    // one visible and one hidden bit, spins +1 for bit 0
    let bm = ClassicalBm::restricted_bits(1, 1, vec![0.5, -0.2, 0.3]).unwrap();
    let e = bm.energies();
    let want = [0.5 - 0.2 + 0.3, 0.5 + 0.2 - 0.3, -0.5 - 0.2 - 0.3, -0.5 + 0.2 + 0.3];
    for (a, b) in e.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn classical_machine_agrees_with_its_quantum_embedding() {
    let mut rng = random::rng(4);
    let bm = random::classical(3, 2, 3, 1.0, &mut rng).unwrap();
    let m = thermalize(&bm.to_quantum().unwrap()).unwrap();
    let pv = bm.marginal();
    assert!(m.sigma_v().op().max_abs_diff(&HermitianOperator::from_real_diagonal(&pv)) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn thermal_state_is_normalized_gibbs(seed in any::<u64>(), dv in 1usize..4, dh in 1usize..4) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(dv, dh).unwrap();
        let h = random::model(dims, 3, 2.0, &mut rng).unwrap();
        let m = thermalize(&h).unwrap();
        prop_assert!((m.sigma_vh().op().trace() - 1.0).abs() < 1e-12);
        prop_assert!((m.sigma_v().op().trace() - 1.0).abs() < 1e-12);
        let e = matrix_function(&eigh(&h.hamiltonian()).unwrap(), |l| (-l).exp()).unwrap();
        prop_assert!((e.trace() - m.partition_function()).abs() < 1e-10 * e.trace());
        prop_assert!(m.sigma_vh().op().max_abs_diff(&e.scale(1.0 / e.trace())) < 1e-12);
        prop_assert!(m.kappa() >= dv as f64 - 1e-9);
    }

    #[test]
    fn qc_blocks_reassemble(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let basis = random::unitary(3, &mut rng);
        let h = random::qc_model(dims, 2, 1.0, &basis, &mut rng).unwrap();
        let qc = qc_decompose(&h, &basis).unwrap();
        for (a, b) in qc.reassemble_terms().iter().zip(&h.terms) {
            prop_assert!(a.max_abs_diff(b) < 1e-12);
        }
        let p = qc.p();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let full = thermalize(&h).unwrap();
        prop_assert!(qc.sigma_v().op().max_abs_diff(full.sigma_v().op()) < 1e-12);
        prop_assert!(qc.sigma_vh().max_abs_diff(full.sigma_vh().op()) < 1e-12);
    }

    #[test]
    fn cq_blocks_reassemble(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let dims = BipartiteDims::new(3, 2).unwrap();
        let basis = random::unitary(3, &mut rng);
        let h = random::cq_model(dims, 2, 1.0, &basis, &mut rng).unwrap();
        let cq = cq_decompose(&h, &basis).unwrap();
        for (a, b) in cq.reassemble_terms().iter().zip(&h.terms) {
            prop_assert!(a.max_abs_diff(b) < 1e-12);
        }
        let full = thermalize(&h).unwrap();
        prop_assert!(cq.sigma_v().max_abs_diff(full.sigma_v().op()) < 1e-12);
    }

    #[test]
    fn restricted_packing_round_trips(seed in any::<u64>(), m in 1usize..3, n in 1usize..3) {
        let mut rng = random::rng(seed);
        let spec = random::restricted(2, 2, m, n, 1.0, &mut rng);
        let packed = spec.packed_theta();
        prop_assert_eq!(packed.len(), m + n + m * n);
        let (a, b, w) = spec.unpack(&packed);
        prop_assert_eq!(&a, &spec.a);
        prop_assert_eq!(&b, &spec.b);
        prop_assert_eq!(&w, &spec.w);
        let h = restricted_to_param(&spec).unwrap();
        prop_assert_eq!(h.theta, packed);
    }

    #[test]
    fn restricted_hamiltonian_is_the_bilinear_sum(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = random::restricted(2, 3, 2, 2, 1.0, &mut rng);
        let (iv, ih) = (HermitianOperator::identity(2), HermitianOperator::identity(3));
        let mut g = HermitianOperator::zeros(6);
        for (a, v) in spec.a.iter().zip(&spec.v_ops) { g = g.add(&tensor(v, &ih).scale(*a)); }
        for (b, h) in spec.b.iter().zip(&spec.h_ops) { g = g.add(&tensor(&iv, h).scale(*b)); }
        for (i, v) in spec.v_ops.iter().enumerate() {
            for (j, h) in spec.h_ops.iter().enumerate() {
                g = g.add(&tensor(v, h).scale(spec.w[i][j]));
            }
        }
        prop_assert!(restricted_to_param(&spec).unwrap().hamiltonian().max_abs_diff(&g) < 1e-12);
    }
}
