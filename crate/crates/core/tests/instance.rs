use std::path::Path;

use proptest::prelude::*;
use rmls::instance::*;
use rmls::linalg::{condition_number, norm, HermitianMatrix, StateVector, C64};
use rmls::Error;

fn check_invariants(inst: &QlspInstance, cfg: &GeneratorConfig) -> Result<(), TestCaseError> {
    let a = inst.a();
    prop_assert_eq!(inst.dim(), 1usize << cfg.n);
    prop_assert_eq!(a.matrix().hermiticity_defect(), 0.0);
    prop_assert!((a.spectral_norm().unwrap() - 1.0).abs() <= NORM_TOL);
    for i in 0..inst.dim() {
        prop_assert!(a.matrix().row_nonzeros(i, ZERO_ENTRY_TOL) <= cfg.d);
    }
    prop_assert!((inst.b().norm() - 1.0).abs() <= 1e-12);
    let nonzero_b = inst
        .b()
        .amplitudes()
        .iter()
        .filter(|z| z.norm() > 0.0)
        .count();
    prop_assert!(nonzero_b <= cfg.b_sparsity);
    let kappa = condition_number(a).unwrap();
    prop_assert!((kappa - inst.kappa()).abs() <= 1e-9 * kappa);
    prop_assert!((kappa - cfg.kappa_target).abs() <= cfg.kappa_tol);
    let (x, residual) = exact_solution_with_residual(inst).unwrap();
    prop_assert!(residual <= RESIDUAL_TOL);
    prop_assert!((x.norm() - 1.0).abs() <= 1e-12);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn generated_instances_satisfy_invariants(
        n in 3u32..=4,
        d_frac in 0.0f64..1.0,
        b_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let dim = 1usize << n;
        let d = 1 + (d_frac * (dim - 1) as f64) as usize;
        let mut cfg = GeneratorConfig::new(n, d, 10.0, seed);
        cfg.kappa_tol = f64::INFINITY;
        cfg.b_sparsity = 1 + (b_frac * (dim - 1) as f64) as usize;
        let inst = generate_with_kappa(&cfg).unwrap();
        check_invariants(&inst, &cfg)?;
        prop_assert_eq!(inst.metadata().seed, Some(seed));
    }

    #[test]
    fn post_selected_instances_hit_target(kappa in 3.0f64..8.0, seed in any::<u64>()) {
        let mut cfg = GeneratorConfig::new(3, 3, kappa, seed);
        cfg.kappa_tol = 0.05 * kappa;
        let inst = generate_with_kappa(&cfg).unwrap();
        check_invariants(&inst, &cfg)?;
    }

    #[test]
    fn text_round_trip_is_bit_exact(n in 1u32..=3, kappa in 1.5f64..8.0, seed in any::<u64>()) {
        let mut cfg = GeneratorConfig::new(n, 1 << n, kappa, seed);
        cfg.kappa_tol = 0.5 * kappa;
        let inst = generate_with_kappa(&cfg).unwrap();
        let text = write_instance(&inst);
        let back = parse_instance(&text, Path::new("mem.qlsp")).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let mut cfg = GeneratorConfig::new(3, 3, 5.0, 77);
    cfg.kappa_tol = 0.05;
    let a = generate_with_kappa(&cfg).unwrap();
    let b = generate_with_kappa(&cfg).unwrap();
    assert_eq!(write_instance(&a), write_instance(&b));
    cfg.seed = 78;
    let c = generate_with_kappa(&cfg).unwrap();
    assert_ne!(write_instance(&a), write_instance(&c));
}

#[test]
fn generation_is_independent_of_thread_count() {
    let mut cfg = GeneratorConfig::new(3, 4, 6.0, 5);
    cfg.kappa_tol = 1e-2;
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| generate_with_kappa(&cfg)).unwrap();
    let b = four.install(|| generate_with_kappa(&cfg)).unwrap();
    assert_eq!(write_instance(&a), write_instance(&b));
}

#[test]
fn tight_tolerance_hits_target() {
    let mut cfg = GeneratorConfig::new(2, 2, 4.0, 3);
    cfg.kappa_tol = 1e-3;
    let inst = generate_with_kappa(&cfg).unwrap();
    assert!((inst.kappa() - 4.0).abs() <= 1e-3);
}

#[test]
fn exhausted_post_selection_reports_closest() {
    let mut cfg = GeneratorConfig::new(3, 3, 40.0, 0);
    cfg.kappa_tol = 1e-12;
    cfg.max_attempts = 10;
    match generate_with_kappa(&cfg) {
        Err(Error::PostSelection {
            attempts,
            closest_kappa,
            ..
        }) => {
            assert_eq!(attempts, 10);
            assert!(closest_kappa.is_finite() && closest_kappa >= 1.0);
        }
        other => panic!("expected post-selection failure, got {other:?}"),
    }
}

#[test]
fn invalid_generator_configs() {
    for cfg in [
        GeneratorConfig::new(0, 1, 2.0, 0),
        GeneratorConfig::new(2, 0, 2.0, 0),
        GeneratorConfig::new(2, 5, 2.0, 0),
        GeneratorConfig::new(2, 2, 0.5, 0),
        GeneratorConfig::new(2, 2, f64::NAN, 0),
    ] {
        assert!(
            matches!(generate_with_kappa(&cfg), Err(Error::InvalidArgument(_))),
            "{cfg:?}"
        );
    }
}

#[test]
fn diagonal_example_solution() {
    // A = diag(1, 1/2), b = (1, 1)/√2 gives x ∝ (1, 2)
    let a = HermitianMatrix::diagonal(&[1.0, 0.5]);
    let b = StateVector::normalized(vec![C64::new(1.0, 0.0); 2]).unwrap();
    let inst = QlspInstance::new(a, b, 1, InstanceMetadata::default()).unwrap();
    assert_eq!(inst.kappa(), 2.0);
    let x = exact_solution(&inst).unwrap();
    let expected = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
    for (xi, ei) in x.amplitudes().iter().zip(expected) {
        assert!((xi - C64::new(ei, 0.0)).norm() < 1e-15);
    }
    let raw = unnormalized_solution(&inst).unwrap();
    assert!((norm(&raw) - 2.5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn constructor_rejects_bad_inputs() {
    let b = StateVector::basis(2, 0);
    let unnormalized = QlspInstance::new(
        HermitianMatrix::diagonal(&[2.0, 1.0]),
        b.clone(),
        1,
        Default::default(),
    );
    assert!(matches!(unnormalized, Err(Error::BadNorm { .. })));
    let singular = QlspInstance::new(
        HermitianMatrix::diagonal(&[1.0, 0.0]),
        b.clone(),
        1,
        Default::default(),
    );
    assert!(singular.is_err());
    // a reflection: unit norm, invertible, two nonzeros per row
    let reflection = rmls::linalg::Matrix::from_row_major(
        [0.6, 0.8, 0.8, -0.6].map(|x| C64::new(x, 0.0)).to_vec(),
    )
    .unwrap();
    let reflection = HermitianMatrix::new(reflection).unwrap();
    assert!(QlspInstance::new(reflection.clone(), b.clone(), 2, Default::default()).is_ok());
    assert!(QlspInstance::new(reflection, b, 1, Default::default()).is_err());
}
