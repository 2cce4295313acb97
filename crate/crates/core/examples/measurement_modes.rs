//! Mixture, sampled and forced measurement on a 1TP teleportation: every
//! branch is listed with its probability and fidelity, and the weighted
//! branch average is compared against the mixture-mode result.
//!
//! cargo run --example measurement_modes

use qdc_sim::analysis::{build_input_state, InputStateParams};
use qdc_sim::compiler::{compile, Scheme};
use qdc_sim::engine::{ideal_output_dc, simulate, simulate_branches, MeasurementMode, SimConfig};
use qdc_sim::experiment::remote_cnot;
use qdc_sim::qstate::fidelity_pure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dc = compile(&remote_cnot(), Scheme::OneTp)?;
    let input = build_input_state(&InputStateParams::plus_zero())?;
    let ideal = ideal_output_dc(&dc, &input)?;
    let cfg = SimConfig::state_of_the_art();

    let f_mix = fidelity_pure(&ideal, &simulate(&dc, &input, &cfg)?.rho_out)?;
    println!("mixture: F = {f_mix:.9}");

    let mut weighted = 0.0;
    for (outcomes, res) in simulate_branches(&dc, &input, &cfg)? {
        let f = fidelity_pure(&ideal, &res.rho_out)?;
        weighted += res.branch_probability * f;
        println!("branch {outcomes:?}: p = {:.4}, F = {f:.9}", res.branch_probability);
    }
    println!("probability-weighted branch fidelity = {weighted:.9}");

    for seed in 0..3 {
        let res = simulate(&dc, &input, &cfg.clone().with_measurement(MeasurementMode::Sampled { seed }))?;
        println!("sampled seed {seed}: outcomes {:?}", res.outcomes);
    }
    Ok(())
}
