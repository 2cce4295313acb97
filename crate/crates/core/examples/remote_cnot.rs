//! Compile one remote CNOT with every scheme and print its event template,
//! resource count and output fidelity at the state-of-the-art noise profile.
//!
//! cargo run --example remote_cnot

use qdc_sim::analysis::{build_input_state, InputStateParams};
use qdc_sim::compiler::{compile, count_resources, describe_event, Scheme};
use qdc_sim::engine::{output_fidelity, SimConfig};
use qdc_sim::experiment::remote_cnot;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let circuit = remote_cnot();
    let input = build_input_state(&InputStateParams::plus_zero())?;
    let cfg = SimConfig::state_of_the_art();

    for scheme in Scheme::ALL {
        let dc = compile(&circuit, scheme)?;
        let rc = count_resources(&dc);
        let f = output_fidelity(&dc, &input, &cfg)?;
        println!(
            "== {scheme}: {} CNOT, {} ebit, {} measurements, {} messages; F_out = {f:.6}",
            rc.n_cnot, rc.n_ebit, rc.n_meas, rc.n_classical_msgs
        );
        for ev in &dc.events {
            println!("   {}", describe_event(ev));
        }
        println!("   logical qubits end on wires {:?}", dc.result_location);
    }
    Ok(())
}
