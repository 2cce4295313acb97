//! Closed-form fidelities for single remote gates, first-order error
//! estimates, and the separable input-state family used in sweeps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::ResourceCount;
use crate::qstate::{Mat2, PureState, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("simulated fidelity is 1, so the relative difference is undefined")]
    NoErrorBaseline,
}

fn check_unit(name: &'static str, value: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AnalysisError::OutOfRange { name, value })
    }
}

/// `(α|0⟩ + e^{iφ}√(1-|α|²)|1⟩) ⊗ (γ|0⟩ + e^{iθ}√(1-γ²)|1⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputStateParams {
    pub alpha: C64,
    pub phi: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl InputStateParams {
    /// `(|0⟩ + |1⟩)/√2 ⊗ |0⟩`.
    pub fn plus_zero() -> Self {
        Self::from_alpha_sq(0.5)
    }

    /// Real α with the given `|α|²`, target `|0⟩`.
    pub fn from_alpha_sq(alpha_sq: f64) -> Self {
        InputStateParams { alpha: C64::new(alpha_sq.max(0.0).sqrt(), 0.0), phi: 0.0, gamma: 1.0, theta: 0.0 }
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar((1.0 - self.alpha.norm_sqr()).max(0.0).sqrt(), self.phi)
    }

    /// The target factor `|χ⟩`.
    pub fn chi(&self) -> [C64; 2] {
        [C64::new(self.gamma, 0.0), C64::from_polar((1.0 - self.gamma * self.gamma).max(0.0).sqrt(), self.theta)]
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.alpha.norm() > 1.0 + 1e-12 || !self.alpha.norm().is_finite() {
            return Err(AnalysisError::OutOfRange { name: "|alpha|", value: self.alpha.norm() });
        }
        if self.gamma.abs() > 1.0 + 1e-12 || !self.gamma.is_finite() {
            return Err(AnalysisError::OutOfRange { name: "gamma", value: self.gamma });
        }
        for (name, v) in [("phi", self.phi), ("theta", self.theta)] {
            if !v.is_finite() {
                return Err(AnalysisError::OutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Two-qubit product state for the control (wire 0) and target (wire 1).
pub fn build_input_state(p: &InputStateParams) -> Result<PureState, AnalysisError> {
    p.validate()?;
    let control = [p.alpha, p.beta()];
    let chi = p.chi();
    let amps = vec![control[0] * chi[0], control[0] * chi[1], control[1] * chi[0], control[1] * chi[1]];
    Ok(PureState::normalized(amps).expect("nonzero by construction"))
}

/// 1TP remote gate with Werner ebits only: `(1 + 2F_w)/3`.
pub fn oracle_1tp(f_w: f64) -> Result<f64, AnalysisError> {
    check_unit("F_w", f_w)?;
    Ok((1.0 + 2.0 * f_w) / 3.0)
}

/// Cat-comm remote CNOT with Werner ebits only and target in a
/// computational basis state: `F_w + (1-F_w)/3 (2|α|²-1)²`.
pub fn oracle_cat_cnot(f_w: f64, alpha: C64) -> Result<f64, AnalysisError> {
    check_unit("F_w", f_w)?;
    let a2 = alpha.norm_sqr();
    if a2 > 1.0 + 1e-12 {
        return Err(AnalysisError::OutOfRange { name: "|alpha|", value: alpha.norm() });
    }
    Ok(f_w + (1.0 - f_w) / 3.0 * (2.0 * a2 - 1.0).powi(2))
}

/// How the `|β|⁴` term of the cat-comm controlled-U oracle is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CatOracleForm {
    /// `2|β|⁴ |⟨χ|U|χ⟩|²`, which matches exact simulation.
    #[default]
    Symmetric,
    /// `2|β|⁴ Re[(⟨χ|U†|χ⟩)²]`. Agrees with the symmetric form only when
    /// `⟨χ|U|χ⟩` is real.
    Squared,
}

fn unitarity_error(u: &Mat2) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let s: C64 = (0..2).map(|k| u[k][i].conj() * u[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            err = err.max((s - want).norm());
        }
    }
    err
}

/// Cat-comm remote controlled-U with Werner ebits only, separable input:
/// `F_w + (1-F_w)/3 [(|α|²-|β|²)² + 2|α|⁴|u|² + 2|β|⁴ T]` with
/// `u = ⟨χ|U|χ⟩` and `T` chosen by `form`.
pub fn oracle_cat(f_w: f64, p: &InputStateParams, u: &Mat2, form: CatOracleForm) -> Result<f64, AnalysisError> {
    check_unit("F_w", f_w)?;
    p.validate()?;
    let dev = unitarity_error(u);
    if dev > 1e-10 {
        return Err(AnalysisError::NonUnitary(dev));
    }
    let chi = p.chi();
    let expval: C64 =
        (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| chi[i].conj() * u[i][j] * chi[j]).sum();
    let a2 = p.alpha_sq();
    let b2 = 1.0 - a2;
    let last = match form {
        CatOracleForm::Symmetric => expval.norm_sqr(),
        CatOracleForm::Squared => (expval.conj() * expval.conj()).re,
    };
    let bracket = (a2 - b2).powi(2) + 2.0 * a2 * a2 * expval.norm_sqr() + 2.0 * b2 * b2 * last;
    Ok(f_w + (1.0 - f_w) / 3.0 * bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxKind {
    Linear,
    Exponential,
}

impl ApproxKind {
    pub const ALL: [ApproxKind; 2] = [ApproxKind::Linear, ApproxKind::Exponential];
}

impl fmt::Display for ApproxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ApproxKind::Linear => "linear",
            ApproxKind::Exponential => "exponential",
        })
    }
}

impl FromStr for ApproxKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(ApproxKind::Linear),
            "exponential" | "exp" => Ok(ApproxKind::Exponential),
            _ => Err(format!("unknown approximation `{s}`")),
        }
    }
}

/// First-order output fidelity from resource counts. The linear form is
/// clamped at 0.
pub fn first_order(kind: ApproxKind, rc: &ResourceCount, eps_ebit: f64, eps_cnot: f64) -> f64 {
    let (ne, nc) = (rc.n_ebit as f64, rc.n_cnot as f64);
    match kind {
        ApproxKind::Linear => (1.0 - nc * eps_cnot - ne * eps_ebit).max(0.0),
        ApproxKind::Exponential => (1.0 - eps_ebit).powi(rc.n_ebit as i32) * (1.0 - eps_cnot).powi(rc.n_cnot as i32),
    }
}

/// Below this simulated output error the relative difference is undefined.
pub const NO_ERROR_TOLERANCE: f64 = 1e-12;

/// Percentage difference of approximate over simulated output error;
/// positive when the approximation overestimates the error.
pub fn delta_oe(f_approx: f64, f_sim: f64) -> Result<f64, AnalysisError> {
    let sim_err = 1.0 - f_sim;
    if sim_err.abs() <= NO_ERROR_TOLERANCE {
        return Err(AnalysisError::NoErrorBaseline);
    }
    Ok(((1.0 - f_approx) - sim_err) / sim_err * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{PAULI_X, PAULI_Z};
    use std::f64::consts::FRAC_1_SQRT_2;

    const I2: Mat2 = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];

    #[test]
    fn input_state_examples() {
        let psi = build_input_state(&InputStateParams::plus_zero()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (a[2].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(a[1], C64::new(0.0, 0.0));
        let psi = build_input_state(&InputStateParams::from_alpha_sq(1.0)).unwrap();
        assert_eq!(psi.amplitudes()[0], C64::new(1.0, 0.0));
        let p = InputStateParams { alpha: C64::new(0.3, 0.4), phi: 1.1, gamma: -0.2, theta: 2.5 };
        assert!((build_input_state(&p).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let bad = InputStateParams { alpha: C64::new(1.2, 0.0), ..p };
        assert!(build_input_state(&bad).is_err());
        let bad = InputStateParams { gamma: 1.5, ..p };
        assert!(build_input_state(&bad).is_err());
    }

    #[test]
    fn oracle_1tp_examples() {
        assert_eq!(oracle_1tp(1.0).unwrap(), 1.0);
        assert!((oracle_1tp(0.94).unwrap() - 0.96).abs() < 1e-15);
        assert!((oracle_1tp(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(oracle_1tp(1.1).is_err());
    }

    #[test]
    fn oracle_cat_cnot_examples() {
        let half = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!((oracle_cat_cnot(0.94, half).unwrap() - 0.94).abs() < 1e-15);
        assert!((oracle_cat_cnot(0.94, C64::new(1.0, 0.0)).unwrap() - oracle_1tp(0.94).unwrap()).abs() < 1e-15);
        assert_eq!(oracle_cat_cnot(1.0, C64::new(0.3, 0.1)).unwrap(), 1.0);
    }

    #[test]
    fn oracle_cat_examples() {
        let p = InputStateParams::from_alpha_sq(0.37);
        for form in [CatOracleForm::Symmetric, CatOracleForm::Squared] {
            assert!((oracle_cat(1.0, &p, &PAULI_X, form).unwrap() - 1.0).abs() < 1e-15);
            let f = oracle_cat(0.9, &InputStateParams::plus_zero(), &PAULI_X, form).unwrap();
            assert!((f - 0.9).abs() < 1e-15);
            let f = oracle_cat(0.9, &InputStateParams::from_alpha_sq(1.0), &I2, form).unwrap();
            assert!((f - 1.0).abs() < 1e-15);
        }
        let not_unitary = [[C64::new(2.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        assert!(matches!(
            oracle_cat(0.9, &p, &not_unitary, CatOracleForm::Symmetric),
            Err(AnalysisError::NonUnitary(_))
        ));
        // Both forms agree when ⟨χ|U|χ⟩ is real.
        let a = oracle_cat(0.9, &p, &PAULI_Z, CatOracleForm::Symmetric).unwrap();
        let b = oracle_cat(0.9, &p, &PAULI_Z, CatOracleForm::Squared).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn first_order_examples() {
        let zero = ResourceCount::default();
        for k in ApproxKind::ALL {
            assert_eq!(first_order(k, &zero, 0.0, 0.0), 1.0);
        }
        let one_ebit = ResourceCount { n_ebit: 1, ..zero };
        assert!((first_order(ApproxKind::Linear, &one_ebit, 0.06, 0.0) - 0.94).abs() < 1e-15);
        assert!((first_order(ApproxKind::Exponential, &one_ebit, 0.06, 0.0) - 0.94).abs() < 1e-15);
        let tp_safe = ResourceCount { n_cnot: 6, n_ebit: 2, n_meas: 4, n_classical_msgs: 2 };
        assert!((first_order(ApproxKind::Linear, &tp_safe, 0.06, 0.004) - 0.856).abs() < 1e-12);
        let exp = first_order(ApproxKind::Exponential, &tp_safe, 0.06, 0.004);
        assert!((exp - 0.94f64.powi(2) * 0.996f64.powi(6)).abs() < 1e-15);
        assert!((exp - 0.8626).abs() < 1e-4);
        let many = ResourceCount { n_cnot: 1000, ..zero };
        assert_eq!(first_order(ApproxKind::Linear, &many, 0.0, 0.01), 0.0);
    }

    #[test]
    fn delta_oe_examples() {
        assert_eq!(delta_oe(0.9, 0.9).unwrap(), 0.0);
        let f_w = 0.93;
        let d = delta_oe(f_w, oracle_1tp(f_w).unwrap()).unwrap();
        assert!((d - 50.0).abs() < 1e-9);
        assert_eq!(delta_oe(0.9, 1.0), Err(AnalysisError::NoErrorBaseline));
    }
}
