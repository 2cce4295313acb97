//! How far the linear and exponential first-order fidelity estimates sit
//! from the simulated fidelity for each scheme (the relative gap Δ_oe).
//!
//! cargo run --example first_order_gap

use qdc_sim::analysis::{build_input_state, delta_oe, first_order, ApproxKind, InputStateParams};
use qdc_sim::compiler::{compile, count_resources, Scheme};
use qdc_sim::engine::{output_fidelity, SimConfig};
use qdc_sim::experiment::{linspace, remote_cnot};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = build_input_state(&InputStateParams::plus_zero())?;
    println!(
        "{:<10} {:>8} {:>8} {:>10} {:>14} {:>14}",
        "scheme", "eps_ebit", "eps_cnot", "F_sim", "gap linear %", "gap exp %"
    );
    for scheme in Scheme::ALL {
        let dc = compile(&remote_cnot(), scheme)?;
        let rc = count_resources(&dc);
        for eps in linspace(0.02, 0.10, 3) {
            let eps_cnot = eps / 10.0;
            let cfg = SimConfig::ideal().with_werner(1.0 - eps)?.with_gate_error(eps_cnot)?;
            let f_sim = output_fidelity(&dc, &input, &cfg)?;
            let gap =
                |k| delta_oe(first_order(k, &rc, eps, eps_cnot), f_sim).map_or("NA".into(), |d| format!("{d:.3}"));
            println!(
                "{:<10} {eps:>8.3} {eps_cnot:>8.4} {f_sim:>10.6} {:>14} {:>14}",
                scheme.to_string(),
                gap(ApproxKind::Linear),
                gap(ApproxKind::Exponential)
            );
        }
    }
    Ok(())
}
