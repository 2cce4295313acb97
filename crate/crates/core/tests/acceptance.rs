//! Acceptance criteria for the simulator. Runs without the libtest harness
//! so that every `criterion N: PASS|FAIL` line reaches the test log; the
//! process exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qdc_sim::analysis::{
    build_input_state, delta_oe, first_order, oracle_1tp, oracle_cat_cnot, ApproxKind, InputStateParams,
};
use qdc_sim::compiler::{compile, count_resources, DistributedCircuit, ResourceCount, Scheme};
use qdc_sim::engine::{ideal_output_dc, simulate, simulate_branches, MeasurementMode, SimConfig};
use qdc_sim::experiment::{linspace, remote_chain, remote_cnot};
use qdc_sim::qasm::Circuit;
use qdc_sim::qstate::{fidelity_pure, BellKind, Gate, PureState, C64};

const EXACT_TOL: f64 = 1e-9;
const BRANCH_TOL: f64 = 1e-12;
const DELTA_OE_FLOOR: f64 = -1e-9;
const GAP_TOL_PERCENT: f64 = 0.1;
const NOISE_FREE_TOL: f64 = 1e-10;

fn report(n: u32, what: &str, pass: bool, detail: String) {
    println!("criterion {n:>2}: {} | {what} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {what}: {detail}");
}

fn f_out(dc: &DistributedCircuit, input: &PureState, cfg: &SimConfig) -> f64 {
    let ideal = ideal_output_dc(dc, input).unwrap();
    let res = simulate(dc, input, cfg).unwrap();
    fidelity_pure(&ideal, &res.rho_out).unwrap()
}

fn ent_only(f_w: f64) -> SimConfig {
    SimConfig::ideal().with_werner(f_w).unwrap()
}

fn plus_zero() -> PureState {
    build_input_state(&InputStateParams::plus_zero()).unwrap()
}

fn compiled(s: Scheme) -> DistributedCircuit {
    compile(&remote_cnot(), s).unwrap()
}

/// F_w ∈ {0.90, 0.92, …, 1.0}.
fn fw_even_grid() -> Vec<f64> {
    (0..=5).map(|i| 0.90 + 0.02 * i as f64).collect()
}

/// ε_ebit ∈ {0.01, 0.02, …, 0.10}.
fn soa_ebit_grid() -> Vec<f64> {
    linspace(0.01, 0.10, 10)
}

fn distilled_ebit_grid() -> Vec<f64> {
    linspace(0.001, 0.010, 10)
}

fn cnot_grid() -> Vec<f64> {
    linspace(0.001, 0.010, 10)
}

fn alpha_sq_grid() -> Vec<f64> {
    linspace(0.0, 1.0, 11)
}

fn criterion_01_one_tp_matches_closed_form() {
    let start = Instant::now();
    let dc = compiled(Scheme::OneTp);
    let inputs: Vec<InputStateParams> = (0..12)
        .map(|k| {
            let k = k as f64;
            InputStateParams {
                alpha: C64::from_polar((0.05 + 0.08 * k).min(1.0).sqrt(), 0.7 * k),
                phi: (0.9 * k) % (2.0 * PI),
                gamma: 1.0 - 0.15 * k,
                theta: (1.3 * k) % (2.0 * PI),
            }
        })
        .collect();
    let mut worst: f64 = 0.0;
    for p in &inputs {
        let psi = build_input_state(p).unwrap();
        for f_w in fw_even_grid() {
            let f = f_out(&dc, &psi, &ent_only(f_w));
            worst = worst.max((f - oracle_1tp(f_w).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "1TP entanglement-only equals (1+2F_w)/3",
        worst < EXACT_TOL && elapsed < Duration::from_secs(5),
        format!(
            "max |diff| = {worst:.2e} (tol {EXACT_TOL:e}) over {} states x 6 F_w; {elapsed:.2?} (< 5 s)",
            inputs.len()
        ),
    );
}

fn criterion_02_cat_comm_matches_closed_form() {
    let start = Instant::now();
    let dc = compiled(Scheme::CatComm);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for gamma in [1.0, 0.0] {
        for a2 in alpha_sq_grid() {
            let p = InputStateParams { gamma, ..InputStateParams::from_alpha_sq(a2) };
            let psi = build_input_state(&p).unwrap();
            for f_w in linspace(0.90, 0.99, 10) {
                let f = f_out(&dc, &psi, &ent_only(f_w));
                worst = worst.max((f - oracle_cat_cnot(f_w, p.alpha).unwrap()).abs());
                n += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "cat-comm entanglement-only equals F_w + (1-F_w)/3 (2|a|^2-1)^2",
        worst < EXACT_TOL && elapsed < Duration::from_secs(5),
        format!("max |diff| = {worst:.2e} (tol {EXACT_TOL:e}) over {n} points; {elapsed:.2?} (< 5 s)"),
    );
}

struct GapRow {
    scheme: Scheme,
    kind: ApproxKind,
    eps_ebit: f64,
    eps_cnot: f64,
    delta: f64,
}

/// Δ_oe for every scheme over the one-at-a-time grids. Rows where the
/// simulated fidelity is exactly 1 have no defined Δ_oe and are skipped.
fn gap_rows() -> (Vec<GapRow>, usize) {
    let psi = plus_zero();
    let mut rows = Vec::new();
    let mut skipped = 0;
    let mut points: Vec<(f64, f64)> = Vec::new();
    points.extend(soa_ebit_grid().into_iter().map(|e| (e, 0.0)));
    points.extend(distilled_ebit_grid().into_iter().map(|e| (e, 0.0)));
    points.extend(cnot_grid().into_iter().map(|c| (0.0, c)));
    for s in Scheme::ALL {
        let dc = compiled(s);
        let rc = count_resources(&dc);
        for &(eps_ebit, eps_cnot) in &points {
            let cfg = SimConfig::ideal().with_werner(1.0 - eps_ebit).unwrap().with_gate_error(eps_cnot).unwrap();
            let f_sim = f_out(&dc, &psi, &cfg);
            for kind in ApproxKind::ALL {
                match delta_oe(first_order(kind, &rc, eps_ebit, eps_cnot), f_sim) {
                    Ok(delta) => rows.push(GapRow { scheme: s, kind, eps_ebit, eps_cnot, delta }),
                    Err(_) => skipped += 1,
                }
            }
        }
    }
    (rows, skipped)
}

fn criterion_03_first_order_is_an_upper_bound_on_error() {
    let start = Instant::now();
    let (rows, skipped) = gap_rows();
    let worst = rows.iter().min_by(|a, b| a.delta.total_cmp(&b.delta)).unwrap();
    let elapsed = start.elapsed();
    report(
        3,
        "delta_oe >= -1e-9 for linear and exponential, all five schemes",
        worst.delta >= DELTA_OE_FLOOR && elapsed < Duration::from_secs(30),
        format!(
            "min delta_oe = {:.3e}% ({} {}, eps_ebit={}, eps_cnot={}) over {} rows, {} undefined rows skipped; {elapsed:.2?} (< 30 s)",
            worst.delta,
            worst.scheme,
            worst.kind,
            worst.eps_ebit,
            worst.eps_cnot,
            rows.len(),
            skipped
        ),
    );
}

fn criterion_04_one_tp_linear_gap_is_fifty_percent() {
    let dc = compiled(Scheme::OneTp);
    let rc = count_resources(&dc);
    let psi = plus_zero();
    let mut worst: f64 = 0.0;
    for eps in soa_ebit_grid().into_iter().chain(distilled_ebit_grid()) {
        let f_sim = f_out(&dc, &psi, &ent_only(1.0 - eps));
        let d = delta_oe(first_order(ApproxKind::Linear, &rc, eps, 0.0), f_sim).unwrap();
        worst = worst.max((d - 50.0).abs());
    }
    report(
        4,
        "1TP entanglement-only linear delta_oe = 50%",
        worst <= GAP_TOL_PERCENT,
        format!("max |delta_oe - 50| = {worst:.2e} points (tol {GAP_TOL_PERCENT})"),
    );
}

fn criterion_05_two_tp_equals_tp_safe_under_entanglement_error() {
    let (two, safe) = (compiled(Scheme::TwoTp), compiled(Scheme::TpSafe));
    let psi = plus_zero();
    let mut worst: f64 = 0.0;
    for eps in soa_ebit_grid() {
        let cfg = ent_only(1.0 - eps);
        worst = worst.max((f_out(&two, &psi, &cfg) - f_out(&safe, &psi, &cfg)).abs());
    }
    report(
        5,
        "2TP and TP-safe agree with only entanglement error",
        worst < EXACT_TOL,
        format!("max |F_2TP - F_TPsafe| = {worst:.2e} (tol {EXACT_TOL:e})"),
    );
}

fn criterion_06_two_tp_is_flat_in_phase() {
    let dc = compiled(Scheme::TwoTp);
    let mut spread: f64 = 0.0;
    for f_w in [0.90, 0.94, 0.99] {
        let fs: Vec<f64> = linspace(0.0, 2.0 * PI, 6)
            .into_iter()
            .map(|phi| {
                let p = InputStateParams { phi, ..InputStateParams::from_alpha_sq(0.5) };
                f_out(&dc, &build_input_state(&p).unwrap(), &ent_only(f_w))
            })
            .collect();
        let (lo, hi) = fs.iter().fold((f64::MAX, f64::MIN), |(l, h), &f| (l.min(f), h.max(f)));
        spread = spread.max(hi - lo);
    }
    report(
        6,
        "2TP entanglement-only F_out independent of phi at |a|^2 = 1/2",
        spread < EXACT_TOL,
        format!("max spread = {spread:.2e} (tol {EXACT_TOL:e}) over phi in {{0, 2pi/5, ..., 2pi}}"),
    );
}

fn criterion_07_cat_comm_error_peaks_at_balanced_input() {
    let dc = compiled(Scheme::CatComm);
    let grid = alpha_sq_grid();
    let errors: Vec<f64> = grid
        .iter()
        .map(|&a2| 1.0 - f_out(&dc, &build_input_state(&InputStateParams::from_alpha_sq(a2)).unwrap(), &ent_only(0.94)))
        .collect();
    let argmax = (0..errors.len()).max_by(|&i, &j| errors[i].total_cmp(&errors[j])).unwrap();
    let strict = errors.iter().enumerate().all(|(i, &e)| i == argmax || e < errors[argmax]);
    report(
        7,
        "cat-comm output error maximal at |a|^2 = 0.5",
        (grid[argmax] - 0.5).abs() < 1e-12 && strict,
        format!("argmax |a|^2 = {:.1}, error there {:.6}, unique = {strict}", grid[argmax], errors[argmax]),
    );
}

fn criterion_08_teleportation_is_outcome_independent() {
    let dc = compiled(Scheme::OneTp);
    let psi = plus_zero();
    let mut worst: f64 = 0.0;
    let mut branches = 0;
    for kind in BellKind::ALL {
        let res = simulate_branches(&dc, &psi, &SimConfig::ideal().with_ebit(kind)).unwrap();
        branches += res.len();
        assert_eq!(res.len(), 4, "{kind:?}: expected four BSM branches");
        for (_, r) in &res[1..] {
            worst = worst.max(r.rho_out.max_abs_diff(&res[0].1.rho_out));
        }
        for seed in 0..16 {
            let cfg = SimConfig::ideal().with_ebit(kind).with_measurement(MeasurementMode::Sampled { seed });
            let r = simulate(&dc, &psi, &cfg).unwrap();
            worst = worst.max(r.rho_out.max_abs_diff(&res[0].1.rho_out));
        }
    }
    report(
        8,
        "1TP corrected output identical across BSM outcomes for each Bell ebit",
        worst < BRANCH_TOL,
        format!(
            "max entry diff = {worst:.2e} (tol {BRANCH_TOL:e}) over {branches} forced branches and 64 sampled runs"
        ),
    );
}

fn criterion_09_resource_counts() {
    let expect =
        [(Scheme::CatComm, (2, 1)), (Scheme::OneTp, (2, 1)), (Scheme::TwoTp, (3, 2)), (Scheme::TpSafe, (6, 2))];
    let got: Vec<(Scheme, ResourceCount)> = expect.iter().map(|&(s, _)| (s, count_resources(&compiled(s)))).collect();
    let pass = expect.iter().zip(&got).all(|(&(_, (c, e)), (_, rc))| rc.n_cnot == c && rc.n_ebit == e);
    let detail = got.iter().map(|(s, rc)| format!("{s}=({},{})", rc.n_cnot, rc.n_ebit)).collect::<Vec<_>>().join(" ");
    report(9, "(n_cnot, n_ebit) per scheme", pass, detail);
}

fn single_error_outputs(s: Scheme, eps_ebit: f64, eps_cnot: f64, r: f64) -> (f64, f64, f64) {
    let dc = compiled(s);
    let psi = plus_zero();
    let e = 1.0 - f_out(&dc, &psi, &SimConfig::ideal().with_werner(1.0 - eps_ebit).unwrap());
    let g = 1.0 - f_out(&dc, &psi, &SimConfig::ideal().with_gate_error(eps_cnot).unwrap());
    let m = 1.0 - f_out(&dc, &psi, &SimConfig::ideal().with_memory_rate(r).unwrap());
    (e, g, m)
}

fn criterion_10_error_type_ordering_at_state_of_the_art_values() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for s in Scheme::DISTRIBUTED {
        let (e, g, m) = single_error_outputs(s, 0.06, 0.004, 0.055);
        pass &= e > g && g > m;
        lines.push(format!("{s}: ebit {e:.5} > cnot {g:.5} > memory {m:.5}"));
    }
    let elapsed = start.elapsed();
    report(
        10,
        "entanglement > gate > memory error, each alone at state-of-the-art values",
        pass && elapsed < Duration::from_secs(10),
        format!("{}; {elapsed:.2?} (< 10 s)", lines.join("; ")),
    );
}

fn criterion_11_distilled_regime_flip() {
    let mut lines = Vec::new();
    let mut pass = true;
    for s in Scheme::ALL {
        let (e, g, _) = single_error_outputs(s, 0.005, 0.005, 0.0);
        pass &= g >= e;
        lines.push(format!("{s}: cnot {g:.5} >= ebit {e:.5}"));
    }
    report(11, "gate error dominates at eps_ebit = eps_cnot = 0.5%", pass, lines.join("; "));
}

/// Smallest `k` in `ks` whose chain of `k` remote CNOTs has output error ≥ 50%.
fn crossing(s: Scheme, ks: std::ops::RangeInclusive<usize>) -> (Option<usize>, Vec<f64>) {
    let psi = build_input_state(&InputStateParams::plus_zero()).unwrap().pad_zeros(2);
    let mut errs = Vec::new();
    for k in ks.clone() {
        let dc = compile(&remote_chain(k), s).unwrap();
        let e = 1.0 - f_out(&dc, &psi, &SimConfig::state_of_the_art());
        errs.push(e);
        if e >= 0.5 {
            return (Some(k), errs);
        }
    }
    (None, errs)
}

fn criterion_12_fifty_percent_threshold() {
    let start = Instant::now();
    let (cat, cat_errs) = crossing(Scheme::CatComm, 1..=30);
    let (safe, safe_errs) = crossing(Scheme::TpSafe, 1..=30);
    let elapsed = start.elapsed();
    let ok_cat = cat.is_some_and(|k| (8..=25).contains(&k));
    let ok_safe = safe.is_some_and(|k| (3..=10).contains(&k));
    report(
        12,
        "chain of remote CNOTs crosses 50% output error",
        ok_cat && ok_safe && elapsed < Duration::from_secs(120),
        format!(
            "cat-comm k = {cat:?} (band 8..=25, last error {:.3}), tp-safe k = {safe:?} (band 3..=10, last error {:.3}); {elapsed:.2?} (< 120 s)",
            cat_errs.last().unwrap(),
            safe_errs.last().unwrap()
        ),
    );
}

/// Circuits of up to six qubits mixing local and remote gates.
fn correctness_circuits() -> Vec<Circuit> {
    let mut out = vec![remote_cnot(), remote_chain(6)];
    let mut c = Circuit::new("ghz-5", 5);
    c.push(Gate::H(0));
    for q in 0..4 {
        c.cx(q, q + 1);
    }
    out.push(c);
    let mut c = Circuit::new("mixed-6", 6);
    c.push(Gate::H(0)).push(Gate::Ry(0.7, 4)).push(Gate::T(2));
    c.cx(0, 5).push(Gate::Swap(1, 4)).push(Gate::Cz(2, 3)).push(Gate::CPhase(1.1, 5, 1));
    c.push(Gate::U3 { theta: 0.3, phi: 1.2, lambda: -0.4, q: 3 }).cx(4, 0);
    out.push(c);
    let mut c = Circuit::new("reverse-3", 3);
    c.push(Gate::Rx(0.9, 2)).cx(2, 0).cx(1, 2).push(Gate::S(0)).cx(0, 2);
    out.push(c);
    out
}

fn random_input(n: usize, seed: u64) -> PureState {
    let amps = (0..1u64 << n)
        .map(|i| {
            let x = ((i + 1) * 2654435761 + seed * 40503) as f64;
            C64::new((x * 0.37).sin(), (x * 0.91).cos())
        })
        .collect();
    PureState::normalized(amps).unwrap()
}

fn criterion_13_noise_free_compilation_is_exact() {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    let mut skipped = Vec::new();
    for c in correctness_circuits() {
        let psi = random_input(c.n_qubits, 3);
        for s in Scheme::ALL {
            let dc = match compile(&c, s) {
                Ok(dc) => dc,
                Err(e) => {
                    skipped.push(format!("{}/{s}: {e}", c.name));
                    continue;
                }
            };
            worst = worst.max((1.0 - f_out(&dc, &psi, &SimConfig::ideal())).abs());
            runs += 1;
        }
    }
    report(
        13,
        "noise-free distributed output equals monolithic ideal (substitute for corpus curves)",
        worst < NOISE_FREE_TOL && runs >= 20,
        format!(
            "max |1 - F| = {worst:.2e} (tol {NOISE_FREE_TOL:e}) over {runs} runs; inapplicable: [{}]",
            skipped.join("; ")
        ),
    );
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 13] = [
        ("criterion_01_one_tp_matches_closed_form", criterion_01_one_tp_matches_closed_form),
        ("criterion_02_cat_comm_matches_closed_form", criterion_02_cat_comm_matches_closed_form),
        ("criterion_03_first_order_is_an_upper_bound_on_error", criterion_03_first_order_is_an_upper_bound_on_error),
        ("criterion_04_one_tp_linear_gap_is_fifty_percent", criterion_04_one_tp_linear_gap_is_fifty_percent),
        (
            "criterion_05_two_tp_equals_tp_safe_under_entanglement_error",
            criterion_05_two_tp_equals_tp_safe_under_entanglement_error,
        ),
        ("criterion_06_two_tp_is_flat_in_phase", criterion_06_two_tp_is_flat_in_phase),
        ("criterion_07_cat_comm_error_peaks_at_balanced_input", criterion_07_cat_comm_error_peaks_at_balanced_input),
        ("criterion_08_teleportation_is_outcome_independent", criterion_08_teleportation_is_outcome_independent),
        ("criterion_09_resource_counts", criterion_09_resource_counts),
        (
            "criterion_10_error_type_ordering_at_state_of_the_art_values",
            criterion_10_error_type_ordering_at_state_of_the_art_values,
        ),
        ("criterion_11_distilled_regime_flip", criterion_11_distilled_regime_flip),
        ("criterion_12_fifty_percent_threshold", criterion_12_fifty_percent_threshold),
        ("criterion_13_noise_free_compilation_is_exact", criterion_13_noise_free_compilation_is_exact),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        if std::panic::catch_unwind(run).is_err() {
            failed.push(name);
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
