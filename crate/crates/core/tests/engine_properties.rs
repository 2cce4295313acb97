//! Engine invariants: determinism, measurement-mode equivalence, monotone
//! noise response, and the cat-comm controlled-U oracle.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use qdc_sim::analysis::{build_input_state, oracle_cat, CatOracleForm, InputStateParams};
use qdc_sim::compiler::{compile, DistributedCircuit, Event, Scheme};
use qdc_sim::engine::{
    elapsed_time, ideal_output_dc, simulate, simulate_branches, MeasurementMode, ScheduleMode, SimConfig,
};
use qdc_sim::experiment::{linspace, remote_chain, remote_cnot};
use qdc_sim::qasm::Op;
use qdc_sim::qstate::{fidelity_pure, BellKind, DensityMatrix, Gate, PureState, C64};

const MODE_TOL: f64 = 1e-10;
const BRANCH_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-9;

fn plus_zero() -> PureState {
    build_input_state(&InputStateParams::plus_zero()).unwrap()
}

fn skewed_input() -> PureState {
    let p = InputStateParams { alpha: C64::from_polar(0.55f64.sqrt(), 0.3), phi: 1.1, gamma: 0.8, theta: 2.0 };
    build_input_state(&p).unwrap()
}

fn output_error(dc: &DistributedCircuit, psi: &PureState, cfg: &SimConfig) -> f64 {
    let ideal = ideal_output_dc(dc, psi).unwrap();
    1.0 - fidelity_pure(&ideal, &simulate(dc, psi, cfg).unwrap().rho_out).unwrap()
}

fn weighted_branch_sum(dc: &DistributedCircuit, psi: &PureState, cfg: &SimConfig) -> (DensityMatrix, f64) {
    let branches = simulate_branches(dc, psi, cfg).unwrap();
    let n = branches[0].1.rho_out.n_qubits();
    let mut acc = vec![C64::default(); 1 << (2 * n)];
    let mut total = 0.0;
    for (_, r) in &branches {
        total += r.branch_probability;
        for (a, x) in acc.iter_mut().zip(r.rho_out.entries()) {
            *a += x * r.branch_probability;
        }
    }
    (DensityMatrix::from_entries(n, acc).unwrap(), total)
}

#[test]
fn mixture_mode_is_bit_identical_across_runs() {
    for s in Scheme::ALL {
        let dc = compile(&remote_chain(3), s).unwrap_or_else(|_| compile(&remote_cnot(), s).unwrap());
        let psi = skewed_input().pad_zeros(dc.n_processing - 2);
        let a = simulate(&dc, &psi, &SimConfig::state_of_the_art()).unwrap();
        let b = simulate(&dc, &psi, &SimConfig::state_of_the_art()).unwrap();
        assert_eq!(a, b, "{s}");
    }
}

#[test]
fn mixture_equals_weighted_branch_average_with_noise() {
    let cfg = SimConfig::state_of_the_art();
    for s in Scheme::DISTRIBUTED {
        let dc = compile(&remote_cnot(), s).unwrap();
        let psi = skewed_input();
        let mixture = simulate(&dc, &psi, &cfg).unwrap().rho_out;
        let (avg, total) = weighted_branch_sum(&dc, &psi, &cfg);
        assert!((total - 1.0).abs() < MODE_TOL, "{s}: branch probabilities sum to {total}");
        assert!(mixture.max_abs_diff(&avg) < MODE_TOL, "{s}: {}", mixture.max_abs_diff(&avg));
    }
}

#[test]
fn without_local_noise_every_sampled_branch_equals_mixture() {
    for kind in BellKind::ALL {
        let cfg = SimConfig::ideal().with_werner(0.93).unwrap().with_ebit(kind);
        for s in Scheme::DISTRIBUTED {
            let dc = compile(&remote_cnot(), s).unwrap();
            let psi = skewed_input();
            let mixture = simulate(&dc, &psi, &cfg).unwrap().rho_out;
            for seed in 0..8 {
                let sampled =
                    simulate(&dc, &psi, &cfg.clone().with_measurement(MeasurementMode::Sampled { seed })).unwrap();
                assert!(mixture.max_abs_diff(&sampled.rho_out) < BRANCH_TOL, "{s} {kind:?} seed {seed}");
            }
        }
    }
}

type Sweep = (&'static str, Vec<f64>, fn(f64) -> SimConfig);

#[test]
fn output_error_is_monotone_in_each_error_source() {
    let psi = plus_zero();
    let sweeps: [Sweep; 3] = [
        ("eps_ebit", linspace(0.0, 0.2, 21), |e| SimConfig::ideal().with_werner(1.0 - e).unwrap()),
        ("eps_cnot", linspace(0.0, 0.02, 21), |e| SimConfig::ideal().with_gate_error(e).unwrap()),
        ("r", linspace(0.0, 0.2, 21), |r| SimConfig::ideal().with_memory_rate(r).unwrap()),
    ];
    for s in Scheme::ALL {
        let dc = compile(&remote_cnot(), s).unwrap();
        for (name, grid, make) in &sweeps {
            let errs: Vec<f64> = grid.iter().map(|&x| output_error(&dc, &psi, &make(x))).collect();
            for w in errs.windows(2) {
                assert!(w[1] >= w[0] - 1e-15, "{s} {name}: {errs:?}");
            }
        }
    }
}

#[test]
fn layered_schedule_never_takes_longer() {
    for k in [1, 4, 9] {
        for s in Scheme::ALL {
            let Ok(dc) = compile(&remote_chain(k), s) else { continue };
            let seq = elapsed_time(&dc, &SimConfig::state_of_the_art());
            let lay = elapsed_time(&dc, &SimConfig::state_of_the_art().with_schedule(ScheduleMode::Layered));
            assert!(lay <= seq + 1e-15, "{s} k={k}: layered {lay} > sequential {seq}");
        }
    }
}

/// Cat-comm remote controlled-phase built by swapping the target-side CNOT
/// of the remote CNOT template for `CPhase(λ)`.
fn cat_controlled_phase(lambda: f64) -> DistributedCircuit {
    let mut dc = compile(&remote_cnot(), Scheme::CatComm).unwrap();
    let (start, end) = dc.remote_gates[0].events;
    let target = dc.result_location[1];
    let slot = (start..end)
        .find(|&i| matches!(dc.events[i], Event::Gate(Gate::Cnot { target: t, .. }) if t == target))
        .expect("target-side CNOT");
    let Event::Gate(Gate::Cnot { control, target }) = dc.events[slot] else { unreachable!() };
    dc.events[slot] = Event::Gate(Gate::CPhase(lambda, control, target));
    dc.source.ops = vec![Op::Gate(Gate::CPhase(lambda, 0, 1))];
    dc
}

#[test]
fn cat_controlled_s_separates_the_oracle_forms() {
    let dc = cat_controlled_phase(FRAC_PI_2);
    let s = match Gate::S(0).matrix() {
        qdc_sim::qstate::GateMatrix::One(_, m) => m,
        _ => unreachable!(),
    };
    let p = InputStateParams { alpha: C64::from_polar(0.3f64.sqrt(), 0.4), phi: 0.4, gamma: FRAC_1_SQRT_2, theta: 0.0 };
    let psi = build_input_state(&p).unwrap();
    assert!(output_error(&dc, &psi, &SimConfig::ideal()).abs() < ORACLE_TOL);
    for f_w in [0.90, 0.94, 0.99] {
        let f_sim = 1.0 - output_error(&dc, &psi, &SimConfig::ideal().with_werner(f_w).unwrap());
        let sym = oracle_cat(f_w, &p, &s, CatOracleForm::Symmetric).unwrap();
        let sq = oracle_cat(f_w, &p, &s, CatOracleForm::Squared).unwrap();
        assert!((f_sim - sym).abs() < ORACLE_TOL, "F_w {f_w}: sim {f_sim} vs symmetric {sym}");
        assert!((f_sim - sq).abs() > 1e-3, "F_w {f_w}: squared form {sq} should differ from {f_sim}");
    }
}
