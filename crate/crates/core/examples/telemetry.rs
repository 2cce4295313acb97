//! Per-event timeline of a cat-comm chain under the sequential and layered
//! schedules, with the resulting memory-error difference.
//!
//! cargo run --example telemetry

use qdc_sim::analysis::{build_input_state, InputStateParams};
use qdc_sim::compiler::{compile, Scheme};
use qdc_sim::engine::{simulate, ScheduleMode, SimConfig};
use qdc_sim::experiment::remote_chain;
use qdc_sim::qstate::fidelity_pure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dc = compile(&remote_chain(2), Scheme::CatComm)?;
    let input = build_input_state(&InputStateParams::plus_zero())?.pad_zeros(2);
    let ideal = qdc_sim::engine::ideal_output_dc(&dc, &input)?;

    for mode in [ScheduleMode::Sequential, ScheduleMode::Layered] {
        let res = simulate(&dc, &input, &SimConfig::state_of_the_art().with_schedule(mode))?;
        println!("== {mode}: elapsed {:.6} s, F_out {:.6}", res.elapsed, fidelity_pure(&ideal, &res.rho_out)?);
        print!("{}", res.telemetry_csv());
    }
    Ok(())
}
