mod common;

use proptest::prelude::*;
use rmls::engine::ideal_measurement_trace;
use rmls::hamiltonian::*;
use rmls::instance::{exact_solution, QlspInstance};
use rmls::linalg::{eigvalsh, HermitianMatrix, StateVector};
use rmls::schedule::{build_schedule_with_steps, s_of_v, v_bounds};
use rmls::Error;

use common::{identity_instance, instance, linspace, positive_definite_instance};

const VARIANTS: [Variant; 2] = [Variant::GroundState, Variant::GapAmplified];

fn check_spectra(emb: &Embedding<'_>, grid: &[f64]) -> Result<(), TestCaseError> {
    for &s in grid {
        for variant in VARIANTS {
            let r = emb.spectral_report(s, variant).unwrap();
            prop_assert_eq!(
                r.kernel_dim,
                r.expected_kernel_dim(),
                "s = {}, {}",
                s,
                variant
            );
            prop_assert!(
                r.gap_ok(1e-9),
                "s = {}, {}: gap {} < {}",
                s,
                variant,
                r.gap,
                r.gap_bound
            );
            prop_assert!(r.psd_defect <= 1e-10);
            prop_assert!(r.symmetry_defect <= 1e-12);

            let h = emb.slice(s, variant).unwrap();
            let x = emb.tracked_state(s, variant).unwrap();
            let hx = h.h.matrix().mul_vec(x.amplitudes());
            prop_assert!(
                rmls::linalg::norm(&hx) <= 1e-9,
                "tracked state not in kernel"
            );
        }
        let norm_h = emb.h(s).unwrap().h.spectral_norm().unwrap();
        prop_assert!(norm_h <= 1.0 + 1e-9);
        let sing = eigvalsh(&HermitianMatrix::hermitize(&emb.a_of_s(s).unwrap())).unwrap();
        let min_sing = sing.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let kappa = emb.instance().kappa();
        prop_assert!(min_sing >= gap_lower_bound(s, kappa).sqrt() - 1e-9);
        if emb.mode() == EmbeddingMode::General {
            prop_assert!(emb.block_square_defect(s).unwrap() <= 1e-10);
            prop_assert!(emb.isospectral_defect(s).unwrap() <= 1e-9);
            prop_assert!(emb.amplified_spectrum_defect(s).unwrap() <= 1e-8);
        }
    }
    Ok(())
}

fn check_path_speed(emb: &Embedding<'_>) -> Result<(), TestCaseError> {
    let kappa = emb.instance().kappa();
    let h = 1e-6;
    for &s in &linspace(41)[1..40] {
        let fd = emb
            .eigenpath_state(s + h)
            .unwrap()
            .aligned_distance(&emb.eigenpath_state(s - h).unwrap())
            / (2.0 * h);
        let bound = (2.0 / gap_lower_bound(s, kappa)).sqrt();
        prop_assert!(fd <= bound * (1.0 + 1e-4), "s = {}: {} > {}", s, fd, bound);
    }
    let (va, vb) = v_bounds(kappa).unwrap();
    for i in 1..40 {
        let v = va + (vb - va) * i as f64 / 40.0;
        let sp = s_of_v(v + h, kappa).unwrap();
        let sm = s_of_v(v - h, kappa).unwrap();
        let fd = emb
            .eigenpath_state(sp)
            .unwrap()
            .aligned_distance(&emb.eigenpath_state(sm).unwrap())
            / (2.0 * h);
        prop_assert!(fd <= 1.0 + 1e-3, "v = {}: speed {}", v, fd);
    }
    Ok(())
}

fn check_no_transition(emb: &Embedding<'_>) -> Result<(), TestCaseError> {
    let grid = linspace(11);
    for &s in &grid {
        for &sp in &grid {
            prop_assert!(emb.no_transition_amplitude(s, sp).unwrap() <= 1e-10);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn general_mode_spectral_properties(n in 1u32..=3, kappa in 1.5f64..20.0, seed in any::<u64>()) {
        let inst = instance(n, kappa, 0.5, seed);
        let emb = Embedding::new(&inst, EmbeddingMode::General).unwrap();
        check_spectra(&emb, &linspace(21))?;
        check_no_transition(&emb)?;
    }

    #[test]
    fn general_mode_path_speed(n in 1u32..=3, kappa in 1.5f64..20.0, seed in any::<u64>()) {
        let inst = instance(n, kappa, 0.5, seed);
        check_path_speed(&Embedding::new(&inst, EmbeddingMode::General).unwrap())?;
    }

    #[test]
    fn positive_definite_mode_properties(n in 1u32..=3, root in 1.3f64..4.0, seed in any::<u64>()) {
        let inst = positive_definite_instance(n, root, seed);
        let emb = Embedding::new(&inst, EmbeddingMode::PositiveDefinite).unwrap();
        check_spectra(&emb, &linspace(21))?;
        check_path_speed(&emb)?;
    }

    #[test]
    fn endpoints_of_the_eigenpath(n in 1u32..=3, kappa in 1.5f64..20.0, seed in any::<u64>()) {
        let inst = instance(n, kappa, 0.5, seed);
        let emb = Embedding::new(&inst, EmbeddingMode::General).unwrap();
        // s = 0: |−⟩ ⊗ |b⟩
        let start = StateVector::minus().kron(inst.b());
        prop_assert!(emb.eigenpath_state(0.0).unwrap().fidelity(&start) >= 1.0 - 1e-12);
        // s = 1: |+⟩ ⊗ |x⟩
        let end = StateVector::plus().kron(&exact_solution(&inst).unwrap());
        prop_assert!(emb.eigenpath_state(1.0).unwrap().fidelity(&end) >= 1.0 - 1e-12);
    }

    #[test]
    fn ideal_step_fidelities(n in 1u32..=2, kappa in 1.5f64..10.0, seed in any::<u64>(), q in 20usize..200) {
        let inst = instance(n, kappa, 0.5, seed);
        let sched = build_schedule_with_steps(inst.kappa(), Variant::GroundState, q).unwrap();
        let delta = sched.delta();
        let trace = ideal_measurement_trace(&inst, &sched, EmbeddingMode::General).unwrap();
        prop_assert_eq!(trace.per_step_fidelities.len(), q);
        prop_assert!(trace.max_infidelity() <= delta * delta + 1e-9);
        prop_assert!(trace.success_probability >= 1.0 - q as f64 * delta * delta - 1e-9);
    }
}

#[test]
fn doubling_steps_reduces_per_step_infidelity() {
    let inst = instance(2, 10.0, 0.5, 11);
    for q in [25, 50, 100, 200] {
        let run = |q| {
            let sched = build_schedule_with_steps(inst.kappa(), Variant::GroundState, q).unwrap();
            ideal_measurement_trace(&inst, &sched, EmbeddingMode::General).unwrap()
        };
        let coarse = run(q);
        let fine = run(2 * q);
        let ratio = coarse.max_infidelity() / fine.max_infidelity();
        assert!(ratio >= 3.5, "q = {q}: ratio {ratio}");
        assert!(fine.success_probability > coarse.success_probability);
    }
}

#[test]
fn ancilla_counts() {
    use EmbeddingMode::*;
    use Variant::*;
    assert_eq!(ancilla_qubits(General, GroundState), 1);
    assert_eq!(ancilla_qubits(General, GapAmplified), 2);
    assert_eq!(ancilla_qubits(PositiveDefinite, GroundState), 0);
    assert_eq!(ancilla_qubits(PositiveDefinite, GapAmplified), 1);
    let inst = identity_instance(2);
    let emb = Embedding::new(&inst, General).unwrap();
    assert_eq!(emb.slice(0.3, GroundState).unwrap().dim(), 8);
    assert_eq!(emb.slice(0.3, GapAmplified).unwrap().dim(), 16);
}

#[test]
fn positive_mode_rejects_indefinite_matrices() {
    let a = HermitianMatrix::diagonal(&[1.0, -0.5]);
    let b = StateVector::basis(2, 0);
    let inst = QlspInstance::new(a, b, 1, Default::default()).unwrap();
    match Embedding::new(&inst, EmbeddingMode::PositiveDefinite) {
        Err(Error::NotPositiveDefinite { min_eigenvalue }) => assert_eq!(min_eigenvalue, -0.5),
        other => panic!("expected rejection, got {other:?}"),
    }
    assert!(Embedding::new(&inst, EmbeddingMode::General).is_ok());
}

#[test]
fn slices_reject_s_outside_unit_interval() {
    let inst = identity_instance(1);
    let emb = Embedding::new(&inst, EmbeddingMode::General).unwrap();
    for s in [-1e-9, 1.0 + 1e-9, f64::NAN] {
        assert!(emb.h(s).is_err());
        assert!(emb.h_prime(s).is_err());
    }
}
