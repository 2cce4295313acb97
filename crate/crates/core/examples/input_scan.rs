//! Output error as a function of the control amplitude |α|² and phase φ,
//! showing the cat-comm peak at |α|² = 1/2 and the flat teleportation schemes.
//!
//! cargo run --example input_scan

use std::f64::consts::PI;

use qdc_sim::analysis::{build_input_state, oracle_cat_cnot, InputStateParams};
use qdc_sim::compiler::{compile, Scheme};
use qdc_sim::engine::{output_fidelity, SimConfig};
use qdc_sim::experiment::{linspace, remote_cnot};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f_w = 0.94;
    let cfg = SimConfig::ideal().with_werner(f_w)?;
    let cat = compile(&remote_cnot(), Scheme::CatComm)?;
    let two = compile(&remote_cnot(), Scheme::TwoTp)?;

    println!("|a|^2   cat-comm err   closed form   2tp err (min..max over phi)");
    for a2 in linspace(0.0, 1.0, 11) {
        let p = InputStateParams::from_alpha_sq(a2);
        let cat_err = 1.0 - output_fidelity(&cat, &build_input_state(&p)?, &cfg)?;
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for phi in linspace(0.0, 2.0 * PI, 6) {
            let e = 1.0 - output_fidelity(&two, &build_input_state(&InputStateParams { phi, ..p })?, &cfg)?;
            lo = lo.min(e);
            hi = hi.max(e);
        }
        let bar = "#".repeat((cat_err * 400.0).round() as usize);
        println!(
            "{a2:>5.1}   {cat_err:>12.6}   {:>11.6}   {lo:.6}..{hi:.6}  {bar}",
            1.0 - oracle_cat_cnot(f_w, p.alpha)?
        );
    }
    Ok(())
}
