//! The three noise maps on small states: Werner ebits, depolarized CNOTs and
//! memory decay, each scored with the Uhlmann fidelity.
//!
//! cargo run --example noise_channels

use qdc_sim::channels::{memory_depol, noisy_cnot, werner, GateErrorParam, MemoryParam, WernerParam};
use qdc_sim::qstate::{bell_state, fidelity_general, fidelity_pure, BellKind, DensityMatrix, Gate, PureState, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi_plus = bell_state(BellKind::PhiPlus);
    for f_w in [1.0, 0.994, 0.94, 0.5] {
        let w = werner(WernerParam::new(f_w)?);
        println!("werner({f_w}): <Phi+|rho|Phi+> = {:.6}", fidelity_pure(&phi_plus, &w)?);
    }

    // |+0> through a CNOT should give |Phi+>; depolarization pulls it toward 1/4.
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let plus_zero = PureState::new(vec![h, C64::default(), h, C64::default()])?;
    let rho = DensityMatrix::from_pure(&plus_zero);
    for eps in [0.0, 0.004, 0.05] {
        let out = noisy_cnot(&rho, 0, 1, GateErrorParam::new(eps)?)?;
        println!("noisy CNOT eps={eps}: F = {:.6}", fidelity_pure(&phi_plus, &out)?);
    }

    // Memory decay of |1> at r = 0.055 Hz over growing idle times.
    let one = DensityMatrix::from_pure(&PureState::basis(1, 1));
    let m = MemoryParam::new(0.055)?;
    for dt in [6e-3, 1.0, 10.0, 100.0] {
        let out = memory_depol(&one, 0, dt, m)?;
        println!("memory dt={dt:>6}s: F = {:.6}", fidelity_general(&one, &out)?);
    }

    let ideal = DensityMatrix::from_pure(&plus_zero).apply_gate(&Gate::Cnot { control: 0, target: 1 })?;
    println!("trace after CNOT = {:.3}, valid = {}", ideal.trace().re, ideal.is_valid(1e-10, 1e-9));
    Ok(())
}
