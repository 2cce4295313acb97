//! Output error of a chain of k remote CNOTs with all three error sources at
//! state-of-the-art values, and the first k reaching 50% per scheme.
//!
//! cargo run --release --example chain_threshold [max_k]

use qdc_sim::analysis::{build_input_state, InputStateParams};
use qdc_sim::compiler::{compile, Scheme};
use qdc_sim::engine::{output_fidelity, SimConfig};
use qdc_sim::experiment::remote_chain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let input = build_input_state(&InputStateParams::plus_zero())?.pad_zeros(2);
    let cfg = SimConfig::state_of_the_art();

    for scheme in [Scheme::Monolithic, Scheme::CatComm, Scheme::TpSafe] {
        let mut crossed = None;
        let mut errs = Vec::new();
        for k in 1..=max_k {
            let dc = compile(&remote_chain(k), scheme)?;
            let e = 1.0 - output_fidelity(&dc, &input, &cfg)?;
            errs.push(format!("{e:.3}"));
            if e >= 0.5 && crossed.is_none() {
                crossed = Some(k);
            }
        }
        let at = crossed.map_or(format!("not within k <= {max_k}"), |k| format!("k = {k}"));
        println!("{scheme:<10} 50% at {at}\n           errors: {}", errs.join(" "));
    }
    Ok(())
}
