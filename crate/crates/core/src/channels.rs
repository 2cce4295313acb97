//! Noise models: imperfect ebits, depolarizing two-qubit gates and memory
//! decoherence. All maps are applied as exact mixtures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::{bell_state, BellKind, DensityMatrix, Gate, StateError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("negative duration {0} s")]
    NegativeDuration(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ChannelError::OutOfRange { name, value, lo: 0.0, hi: 1.0 })
    }
}

/// Werner-state fidelity `F_w`. The entanglement error is `1 - F_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerParam(f64);

impl WernerParam {
    pub fn new(fidelity: f64) -> Result<Self, ChannelError> {
        check_unit("F_w", fidelity).map(WernerParam)
    }

    pub fn from_error(eps_ebit: f64) -> Result<Self, ChannelError> {
        check_unit("eps_ebit", eps_ebit)?;
        Ok(WernerParam(1.0 - eps_ebit))
    }

    pub fn perfect() -> Self {
        WernerParam(1.0)
    }

    pub fn fidelity(self) -> f64 {
        self.0
    }

    pub fn error(self) -> f64 {
        1.0 - self.0
    }
}

/// Depolarizing probability applied with every local CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateErrorParam(f64);

impl GateErrorParam {
    pub fn new(eps_cnot: f64) -> Result<Self, ChannelError> {
        check_unit("eps_cnot", eps_cnot).map(GateErrorParam)
    }

    pub fn zero() -> Self {
        GateErrorParam(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Memory depolarization rate in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParam(f64);

impl MemoryParam {
    pub fn new(rate_hz: f64) -> Result<Self, ChannelError> {
        if rate_hz >= 0.0 && rate_hz.is_finite() {
            Ok(MemoryParam(rate_hz))
        } else {
            Err(ChannelError::OutOfRange { name: "r", value: rate_hz, lo: 0.0, hi: f64::INFINITY })
        }
    }

    /// `r = 1 / T1`.
    pub fn from_t1(t1_seconds: f64) -> Result<Self, ChannelError> {
        Self::new(1.0 / t1_seconds)
    }

    pub fn zero() -> Self {
        MemoryParam(0.0)
    }

    pub fn rate(self) -> f64 {
        self.0
    }

    /// Weight kept on the input state after `dt` seconds.
    pub fn survival(self, dt: f64) -> f64 {
        (-dt * self.0).exp()
    }
}

/// `F_w |Φ+⟩⟨Φ+| + (1-F_w)/3 (|Φ-⟩⟨Φ-| + |Ψ+⟩⟨Ψ+| + |Ψ-⟩⟨Ψ-|)`.
pub fn werner(p: WernerParam) -> DensityMatrix {
    let f = p.fidelity();
    let weights = [f, (1.0 - f) / 3.0, (1.0 - f) / 3.0, (1.0 - f) / 3.0];
    bell_mixture(weights)
}

/// Mixture of the four Bell projectors in `BellKind::ALL` order.
pub fn bell_mixture(weights: [f64; 4]) -> DensityMatrix {
    let mut acc = vec![C64::default(); 16];
    for (kind, w) in BellKind::ALL.into_iter().zip(weights) {
        let proj = DensityMatrix::from_pure(&bell_state(kind));
        for (a, b) in acc.iter_mut().zip(proj.entries()) {
            *a += b * w;
        }
    }
    DensityMatrix::from_entries(2, acc).expect("16 entries")
}

/// Ideal CNOT followed by two-qubit depolarization with probability `ε`:
/// `(1-ε) U ρ U† + ε/4 Tr_{c,t}(ρ) ⊗ 1`.
pub fn noisy_cnot(
    rho: &DensityMatrix,
    control: usize,
    target: usize,
    p: GateErrorParam,
) -> Result<DensityMatrix, ChannelError> {
    let mut out = rho.clone();
    noisy_cnot_in_place(&mut out, control, target, p)?;
    Ok(out)
}

pub fn noisy_cnot_in_place(
    rho: &mut DensityMatrix,
    control: usize,
    target: usize,
    p: GateErrorParam,
) -> Result<(), ChannelError> {
    rho.apply_gate_in_place(&Gate::Cnot { control, target })?;
    // The partial trace over both wires is unchanged by the unitary, so
    // mixing after it is the same map.
    if p.value() > 0.0 {
        rho.depolarize_pair(control, target, p.value())?;
    }
    Ok(())
}

/// `e^{-Δt r} ρ + (1 - e^{-Δt r}) Tr_k(ρ) ⊗ 1/2`.
pub fn memory_depol(rho: &DensityMatrix, k: usize, dt: f64, p: MemoryParam) -> Result<DensityMatrix, ChannelError> {
    let mut out = rho.clone();
    memory_depol_in_place(&mut out, k, dt, p)?;
    Ok(out)
}

pub fn memory_depol_in_place(rho: &mut DensityMatrix, k: usize, dt: f64, p: MemoryParam) -> Result<(), ChannelError> {
    if dt < 0.0 || dt.is_nan() {
        return Err(ChannelError::NegativeDuration(dt));
    }
    let q = 1.0 - p.survival(dt);
    if q > 0.0 {
        rho.depolarize_qubit(k, q)?;
    } else if k >= rho.n_qubits() {
        return Err(StateError::QubitOutOfRange { qubit: k, n: rho.n_qubits() }.into());
    }
    Ok(())
}
