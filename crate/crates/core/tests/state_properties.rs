//! Property tests for the density-matrix layer and the three noise maps.

use proptest::prelude::*;

use qdc_sim::channels::{memory_depol, noisy_cnot, werner, GateErrorParam, MemoryParam, WernerParam};
use qdc_sim::qstate::{fidelity_general, fidelity_pure, DensityMatrix, Gate, PureState, C64};

const TOL: f64 = 1e-10;
const EIG_FLOOR: f64 = -1e-9;

fn pure_state(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
        PureState::normalized(v.into_iter().map(|(r, i)| C64::new(r, i)).collect()).ok()
    })
}

/// Random mixture of three pure states, so the rank is generally above one.
fn mixed_state(n: usize) -> impl Strategy<Value = DensityMatrix> {
    (pure_state(n), pure_state(n), pure_state(n), 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c, w1, w2)| {
        let ab = DensityMatrix::from_pure(&a).mix(&DensityMatrix::from_pure(&b), w1).unwrap();
        ab.mix(&DensityMatrix::from_pure(&c), w2).unwrap()
    })
}

fn angle() -> impl Strategy<Value = f64> {
    -7.0f64..7.0
}

/// Any gate on `n ≥ 2` wires with distinct two-qubit endpoints.
fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    prop_oneof![
        (angle(), angle(), angle(), q.clone()).prop_map(|(theta, phi, lambda, q)| Gate::U3 { theta, phi, lambda, q }),
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::Y),
        q.clone().prop_map(Gate::S),
        q.clone().prop_map(Gate::Tdg),
        (angle(), q.clone()).prop_map(|(a, q)| Gate::Rx(a, q)),
        (angle(), q.clone()).prop_map(|(a, q)| Gate::Ry(a, q)),
        (angle(), q).prop_map(|(a, q)| Gate::Phase(a, q)),
        pair.clone().prop_map(|(control, target)| Gate::Cnot { control, target }),
        pair.clone().prop_map(|(a, b)| Gate::Cz(a, b)),
        (angle(), pair.clone()).prop_map(|(l, (a, b))| Gate::CPhase(l, a, b)),
        pair.prop_map(|(a, b)| Gate::Swap(a, b)),
    ]
}

fn assert_valid(rho: &DensityMatrix) -> Result<(), TestCaseError> {
    prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < TOL, "trace {}", rho.trace());
    prop_assert!(rho.hermiticity_error() < TOL, "hermiticity {}", rho.hermiticity_error());
    let min = rho.eigenvalues().into_iter().fold(f64::MAX, f64::min);
    prop_assert!(min >= EIG_FLOOR, "eigenvalue {min}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_trace_and_hermiticity(rho in mixed_state(3), g in gate(3)) {
        assert_valid(&rho.apply_gate(&g).unwrap())?;
    }

    #[test]
    fn gate_then_inverse_is_identity(psi in pure_state(3), g in gate(3)) {
        let rho = DensityMatrix::from_pure(&psi);
        let back = rho.apply_gate(&g).unwrap().apply_gate(&g.inverse()).unwrap();
        prop_assert!(back.max_abs_diff(&rho) < TOL);
        let mut v = psi.clone();
        v.apply_gate(&g).unwrap();
        v.apply_gate(&g.inverse()).unwrap();
        prop_assert!((v.inner(&psi).norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn pure_state_gate_matches_density_gate(psi in pure_state(3), g in gate(3)) {
        let mut v = psi.clone();
        v.apply_gate(&g).unwrap();
        let rho = DensityMatrix::from_pure(&psi).apply_gate(&g).unwrap();
        prop_assert!(rho.max_abs_diff(&DensityMatrix::from_pure(&v)) < TOL);
    }

    #[test]
    fn fidelity_forms_agree_on_rank_one(psi in pure_state(2), rho in mixed_state(2), psi3 in pure_state(3), rho3 in mixed_state(3)) {
        let general = fidelity_general(&DensityMatrix::from_pure(&psi), &rho).unwrap();
        prop_assert!((general - fidelity_pure(&psi, &rho).unwrap()).abs() < TOL);
        let general = fidelity_general(&DensityMatrix::from_pure(&psi3), &rho3).unwrap();
        prop_assert!((general - fidelity_pure(&psi3, &rho3).unwrap()).abs() < TOL);
    }

    #[test]
    fn partial_trace_of_product_returns_factor(a in pure_state(1), b in pure_state(2)) {
        let (ra, rb) = (DensityMatrix::from_pure(&a), DensityMatrix::from_pure(&b));
        let rho = DensityMatrix::from_pure(&a.tensor(&b));
        prop_assert!(rho.partial_trace(&[0]).unwrap().max_abs_diff(&ra) < TOL);
        prop_assert!(rho.partial_trace(&[1, 2]).unwrap().max_abs_diff(&rb) < TOL);
    }

    #[test]
    fn noise_maps_are_valid_channels(
        rho in mixed_state(3),
        eps in 0.0f64..=1.0,
        r in 0.0f64..10.0,
        dt in 0.0f64..2.0,
        k in 0usize..3,
        d in 1usize..3,
    ) {
        assert_valid(&noisy_cnot(&rho, k, (k + d) % 3, GateErrorParam::new(eps).unwrap()).unwrap())?;
        assert_valid(&memory_depol(&rho, k, dt, MemoryParam::new(r).unwrap()).unwrap())?;
    }

    #[test]
    fn werner_is_a_valid_swap_symmetric_state(f in 0.0f64..=1.0) {
        let w = werner(WernerParam::new(f).unwrap());
        assert_valid(&w)?;
        prop_assert!(w.apply_gate(&Gate::Swap(0, 1)).unwrap().max_abs_diff(&w) < TOL);
    }

    #[test]
    fn memory_depol_is_a_semigroup(rho in mixed_state(2), r in 0.0f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0, k in 0usize..2) {
        let m = MemoryParam::new(r).unwrap();
        let twice = memory_depol(&memory_depol(&rho, k, a, m).unwrap(), k, b, m).unwrap();
        prop_assert!(twice.max_abs_diff(&memory_depol(&rho, k, a + b, m).unwrap()) < TOL);
    }

    #[test]
    fn noiseless_cnot_is_the_ideal_gate(rho in mixed_state(3), c in 0usize..3, d in 1usize..3) {
        let t = (c + d) % 3;
        let noisy = noisy_cnot(&rho, c, t, GateErrorParam::zero()).unwrap();
        let ideal = rho.apply_gate(&Gate::Cnot { control: c, target: t }).unwrap();
        prop_assert_eq!(noisy.max_abs_diff(&ideal), 0.0);
    }
}

#[test]
fn memory_depol_on_zero_state_matches_scalar_weights() {
    let rho = DensityMatrix::from_pure(&PureState::zero(1));
    let out = memory_depol(&rho, 0, 6e-3, MemoryParam::new(0.055).unwrap()).unwrap();
    let q = 1.0 - (-0.055f64 * 6e-3).exp();
    assert!((out.get(0, 0).re - (1.0 - q / 2.0)).abs() < 1e-15);
    assert!((out.get(1, 1).re - q / 2.0).abs() < 1e-15);
}
