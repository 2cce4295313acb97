//! Dense pure states and density matrices.
//!
//! Qubit ordering: wire 0 is the most significant bit of a basis index. A
//! density matrix over `n` wires is stored row-major as a flat vector of
//! `4^n` amplitudes, which lets every superoperator below act on it as a
//! `2n`-qubit vector (row bits high, column bits low).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Largest register the dense representation accepts by default.
pub const DEFAULT_MAX_QUBITS: usize = 14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateQubits(Vec<usize>),
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("partial trace must keep at least one qubit")]
    EmptyKeep,
    #[error("register of {n} qubits exceeds the cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("measurement outcome {outcome} on qubit {qubit} has zero probability")]
    ImpossibleOutcome { qubit: usize, outcome: u8 },
}

/// Whether a qubit carries algorithm state or hosts ebits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Processing,
    Communication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    QpuA,
    QpuB,
    Monolithic,
}

impl Site {
    pub fn other(self) -> Site {
        match self {
            Site::QpuA => Site::QpuB,
            Site::QpuB => Site::QpuA,
            Site::Monolithic => Site::Monolithic,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::QpuA => f.write_str("A"),
            Site::QpuB => f.write_str("B"),
            Site::Monolithic => f.write_str("mono"),
        }
    }
}

/// A placed wire: global index plus immutable role and site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitRef {
    pub index: usize,
    pub role: Role,
    pub site: Site,
}

impl QubitRef {
    pub fn processing(index: usize, site: Site) -> Self {
        QubitRef { index, role: Role::Processing, site }
    }

    pub fn communication(index: usize, site: Site) -> Self {
        QubitRef { index, role: Role::Communication, site }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
}

/// The named two-qubit Bell vector.
pub fn bell_state(kind: BellKind) -> PureState {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let amps = match kind {
        BellKind::PhiPlus => [h, ZERO, ZERO, h],
        BellKind::PhiMinus => [h, ZERO, ZERO, -h],
        BellKind::PsiPlus => [ZERO, h, h, ZERO],
        BellKind::PsiMinus => [ZERO, h, -h, ZERO],
    };
    PureState { n: 2, amps: amps.to_vec() }
}

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Gates understood by the simulator. Only `U3` and `Cnot` survive basis
/// lowering; the others exist so parsed circuits can be represented as-is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    U3 { theta: f64, phi: f64, lambda: f64, q: usize },
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Rx(f64, usize),
    Ry(f64, usize),
    Rz(f64, usize),
    Phase(f64, usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    CPhase(f64, usize, usize),
    Swap(usize, usize),
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), -C64::from_polar(s, lambda)], [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)]]
}

fn diag2(a: C64, b: C64) -> Mat2 {
    [[a, ZERO], [ZERO, b]]
}

pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Either a one- or two-qubit unitary with its wires.
#[derive(Debug, Clone, Copy)]
pub enum GateMatrix {
    One(usize, Mat2),
    /// Basis index of the 4x4 block is `(bit_a << 1) | bit_b`.
    Two(usize, usize, Mat4),
}

impl Gate {
    pub fn targets(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            U3 { q, .. } => vec![q],
            H(q) | X(q) | Y(q) | Z(q) | S(q) | Sdg(q) | T(q) | Tdg(q) => vec![q],
            Rx(_, q) | Ry(_, q) | Rz(_, q) | Phase(_, q) => vec![q],
            Cnot { control, target } => vec![control, target],
            Cz(a, b) | CPhase(_, a, b) | Swap(a, b) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.targets().len() == 2
    }

    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            U3 { .. } => "u3",
            H(_) => "h",
            X(_) => "x",
            Y(_) => "y",
            Z(_) => "z",
            S(_) => "s",
            Sdg(_) => "sdg",
            T(_) => "t",
            Tdg(_) => "tdg",
            Rx(..) => "rx",
            Ry(..) => "ry",
            Rz(..) => "rz",
            Phase(..) => "p",
            Cnot { .. } => "cx",
            Cz(..) => "cz",
            CPhase(..) => "cp",
            Swap(..) => "swap",
        }
    }

    /// Same gate acting on relabelled wires.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        use Gate::*;
        match *self {
            U3 { theta, phi, lambda, q } => U3 { theta, phi, lambda, q: f(q) },
            H(q) => H(f(q)),
            X(q) => X(f(q)),
            Y(q) => Y(f(q)),
            Z(q) => Z(f(q)),
            S(q) => S(f(q)),
            Sdg(q) => Sdg(f(q)),
            T(q) => T(f(q)),
            Tdg(q) => Tdg(f(q)),
            Rx(t, q) => Rx(t, f(q)),
            Ry(t, q) => Ry(t, f(q)),
            Rz(t, q) => Rz(t, f(q)),
            Phase(t, q) => Phase(t, f(q)),
            Cnot { control, target } => Cnot { control: f(control), target: f(target) },
            Cz(a, b) => Cz(f(a), f(b)),
            CPhase(t, a, b) => CPhase(t, f(a), f(b)),
            Swap(a, b) => Swap(f(a), f(b)),
        }
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match *self {
            U3 { theta, phi, lambda, q } => U3 { theta: -theta, phi: -lambda, lambda: -phi, q },
            S(q) => Sdg(q),
            Sdg(q) => S(q),
            T(q) => Tdg(q),
            Tdg(q) => T(q),
            Rx(t, q) => Rx(-t, q),
            Ry(t, q) => Ry(-t, q),
            Rz(t, q) => Rz(-t, q),
            Phase(t, q) => Phase(-t, q),
            CPhase(t, a, b) => CPhase(-t, a, b),
            g => g,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        use Gate::*;
        let h = FRAC_1_SQRT_2;
        match *self {
            U3 { theta, phi, lambda, q } => GateMatrix::One(q, u3_matrix(theta, phi, lambda)),
            H(q) => GateMatrix::One(q, [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]]),
            X(q) => GateMatrix::One(q, PAULI_X),
            Y(q) => GateMatrix::One(q, PAULI_Y),
            Z(q) => GateMatrix::One(q, PAULI_Z),
            S(q) => GateMatrix::One(q, diag2(ONE, I)),
            Sdg(q) => GateMatrix::One(q, diag2(ONE, -I)),
            T(q) => GateMatrix::One(q, diag2(ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4))),
            Tdg(q) => GateMatrix::One(q, diag2(ONE, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4))),
            Rx(t, q) => {
                let (s, c) = (t / 2.0).sin_cos();
                GateMatrix::One(q, [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
            }
            Ry(t, q) => {
                let (s, c) = (t / 2.0).sin_cos();
                GateMatrix::One(q, [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
            }
            Rz(t, q) => GateMatrix::One(q, diag2(C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0))),
            Phase(t, q) => GateMatrix::One(q, diag2(ONE, C64::from_polar(1.0, t))),
            Cnot { control, target } => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
                GateMatrix::Two(control, target, m)
            }
            Cz(a, b) => GateMatrix::Two(a, b, diag4([ONE, ONE, ONE, -ONE])),
            CPhase(t, a, b) => GateMatrix::Two(a, b, diag4([ONE, ONE, ONE, C64::from_polar(1.0, t)])),
            Swap(a, b) => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][2] = ONE;
                m[2][1] = ONE;
                m[3][3] = ONE;
                GateMatrix::Two(a, b, m)
            }
        }
    }

    pub fn check(&self, n: usize) -> Result<(), StateError> {
        let t = self.targets();
        for &q in &t {
            if q >= n {
                return Err(StateError::QubitOutOfRange { qubit: q, n });
            }
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(StateError::DuplicateQubits(t));
        }
        if let Gate::U3 { theta, phi, lambda, .. } = self {
            debug_assert!(theta.is_finite() && phi.is_finite() && lambda.is_finite());
        }
        Ok(())
    }
}

fn diag4(d: [C64; 4]) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, v) in d.into_iter().enumerate() {
        m[i][i] = v;
    }
    m
}

fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

fn conj4(m: &Mat4) -> Mat4 {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = v.conj();
        }
    }
    out
}

// Vector kernels. `pos` is a bit position counted from the least significant
// bit of the flat index.

fn apply_1q(data: &mut [C64], pos: usize, m: &Mat2) {
    let stride = 1usize << pos;
    let len = data.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            let j = i + stride;
            let (a, b) = (data[i], data[j]);
            data[i] = m[0][0] * a + m[0][1] * b;
            data[j] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * stride;
    }
}

fn apply_2q(data: &mut [C64], pos_a: usize, pos_b: usize, m: &Mat4) {
    let (ma, mb) = (1usize << pos_a, 1usize << pos_b);
    for i in 0..data.len() {
        if i & ma != 0 || i & mb != 0 {
            continue;
        }
        let idx = [i, i | mb, i | ma, i | ma | mb];
        let v = [data[idx[0]], data[idx[1]], data[idx[2]], data[idx[3]]];
        for (r, &k) in idx.iter().enumerate() {
            data[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self, StateError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let s = Self { n: len.trailing_zeros() as usize, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Normalizes whatever is passed in.
    pub fn normalized(amps: Vec<C64>) -> Result<Self, StateError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(StateError::NotNormalized(0.0));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Self { n, amps }
    }

    /// Single-qubit state `a|0> + b|1>`, normalized.
    pub fn qubit(a: C64, b: C64) -> Result<Self, StateError> {
        Self::normalized(vec![a, b])
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`, with `self` on the lower-numbered wires.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState { n: self.n + other.n, amps }
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), StateError> {
        gate.check(self.n)?;
        let n = self.n;
        match gate.matrix() {
            GateMatrix::One(q, m) => apply_1q(&mut self.amps, n - 1 - q, &m),
            GateMatrix::Two(a, b, m) => apply_2q(&mut self.amps, n - 1 - a, n - 1 - b, &m),
        }
        Ok(())
    }

    /// Extend with `extra` wires in |0>, appended after the existing ones.
    pub fn pad_zeros(&self, extra: usize) -> PureState {
        self.tensor(&PureState::zero(extra))
    }
}

/// Dense density matrix over `n` wires.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        Self { n, data }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, data }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let dim = psi.amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(psi.amps[r] * psi.amps[c].conj());
            }
        }
        Self { n: psi.n, data }
    }

    /// Build from a row-major `2^n x 2^n` matrix. No validity checks.
    pub fn from_entries(n: usize, data: Vec<C64>) -> Result<Self, StateError> {
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(StateError::BadLength(data.len()));
        }
        Ok(Self { n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![ZERO; dim * dim];
        for ra in 0..da {
            for ca in 0..da {
                let a = self.data[ra * da + ca];
                if a == ZERO {
                    continue;
                }
                for rb in 0..db {
                    for cb in 0..db {
                        data[(ra * db + rb) * dim + ca * db + cb] = a * other.data[rb * db + cb];
                    }
                }
            }
        }
        DensityMatrix { n: self.n + other.n, data }
    }

    fn check_qubit(&self, q: usize) -> Result<(), StateError> {
        if q >= self.n {
            Err(StateError::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn row_pos(&self, q: usize) -> usize {
        2 * self.n - 1 - q
    }

    fn col_pos(&self, q: usize) -> usize {
        self.n - 1 - q
    }

    /// `ρ → U ρ U†`.
    pub fn apply_gate(&self, gate: &Gate) -> Result<DensityMatrix, StateError> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<(), StateError> {
        gate.check(self.n)?;
        match gate.matrix() {
            GateMatrix::One(q, m) => self.apply_unitary_1q(q, &m),
            GateMatrix::Two(a, b, m) => {
                let (ra, rb, ca, cb) = (self.row_pos(a), self.row_pos(b), self.col_pos(a), self.col_pos(b));
                apply_2q(&mut self.data, ra, rb, &m);
                apply_2q(&mut self.data, ca, cb, &conj4(&m));
            }
        }
        Ok(())
    }

    pub fn apply_unitary_1q(&mut self, q: usize, m: &Mat2) {
        let (r, c) = (self.row_pos(q), self.col_pos(q));
        apply_1q(&mut self.data, r, m);
        apply_1q(&mut self.data, c, &conj2(m));
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptyKeep);
        }
        for (i, &q) in keep.iter().enumerate() {
            self.check_qubit(q)?;
            if keep[..i].contains(&q) {
                return Err(StateError::DuplicateQubits(keep.to_vec()));
            }
        }
        let n = self.n;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let bit = |q: usize| 1usize << (n - 1 - q);
        let spread = |wires: &[usize], x: usize| -> usize {
            let m = wires.len();
            wires.iter().enumerate().filter(|(i, _)| x >> (m - 1 - i) & 1 == 1).fold(0, |acc, (_, &q)| acc | bit(q))
        };
        let kept_idx: Vec<usize> = (0..1usize << keep.len()).map(|x| spread(keep, x)).collect();
        let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|x| spread(&traced, x)).collect();
        let dim = self.dim();
        let kd = kept_idx.len();
        let mut data = vec![ZERO; kd * kd];
        for (r, &kr) in kept_idx.iter().enumerate() {
            for (c, &kc) in kept_idx.iter().enumerate() {
                data[r * kd + c] = traced_idx.iter().map(|&t| self.data[(kr | t) * dim + (kc | t)]).sum();
            }
        }
        Ok(DensityMatrix { n: keep.len(), data })
    }

    /// `ρ → (1-p) ρ + p Tr_q(ρ) ⊗ 1/2` in place.
    pub fn depolarize_qubit(&mut self, q: usize, p: f64) -> Result<(), StateError> {
        self.check_qubit(q)?;
        let (rm, cm) = (1usize << self.row_pos(q), 1usize << self.col_pos(q));
        let keep = 1.0 - p;
        for i in 0..self.data.len() {
            let (rb, cb) = (i & rm != 0, i & cm != 0);
            match (rb, cb) {
                (false, false) => {
                    let j = i | rm | cm;
                    let avg = (self.data[i] + self.data[j]) * 0.5;
                    self.data[i] = self.data[i] * keep + avg * p;
                    self.data[j] = self.data[j] * keep + avg * p;
                }
                (true, false) | (false, true) => self.data[i] *= keep,
                (true, true) => {}
            }
        }
        Ok(())
    }

    /// `ρ → (1-p) ρ + p Tr_{a,b}(ρ) ⊗ 1/4` in place.
    pub fn depolarize_pair(&mut self, a: usize, b: usize, p: f64) -> Result<(), StateError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(StateError::DuplicateQubits(vec![a, b]));
        }
        let masks = [
            1usize << self.row_pos(a),
            1usize << self.row_pos(b),
            1usize << self.col_pos(a),
            1usize << self.col_pos(b),
        ];
        let all = masks.iter().fold(0, |acc, m| acc | m);
        let keep = 1.0 - p;
        for i in 0..self.data.len() {
            if i & all != 0 {
                continue;
            }
            // 16 entries sharing every other bit; the traced block is the
            // four with matching row/col bits on both wires.
            let mut idx = [0usize; 16];
            for (k, slot) in idx.iter_mut().enumerate() {
                *slot = masks.iter().enumerate().filter(|(bit, _)| k >> bit & 1 == 1).fold(i, |acc, (_, m)| acc | m);
            }
            let diag = [0usize, 0b0101, 0b1010, 0b1111];
            let tr: C64 = diag.iter().map(|&k| self.data[idx[k]]).sum();
            for (k, &j) in idx.iter().enumerate() {
                let mixed = if diag.contains(&k) { tr * 0.25 } else { ZERO };
                self.data[j] = self.data[j] * keep + mixed * p;
            }
        }
        Ok(())
    }

    /// Discard wire `q` and re-prepare it in |0>.
    pub fn reset_qubit(&mut self, q: usize) -> Result<(), StateError> {
        self.check_qubit(q)?;
        let (rm, cm) = (1usize << self.row_pos(q), 1usize << self.col_pos(q));
        for i in 0..self.data.len() {
            if i & (rm | cm) == 0 {
                let j = i | rm | cm;
                let v = self.data[j];
                self.data[i] += v;
            }
        }
        for i in 0..self.data.len() {
            if i & (rm | cm) != 0 {
                self.data[i] = ZERO;
            }
        }
        Ok(())
    }

    /// Non-selective Z measurement: removes coherences on `q`, leaving the
    /// outcome recorded in the computational basis of that wire.
    pub fn dephase_qubit(&mut self, q: usize) -> Result<(), StateError> {
        self.check_qubit(q)?;
        let (rm, cm) = (1usize << self.row_pos(q), 1usize << self.col_pos(q));
        for i in 0..self.data.len() {
            if (i & rm != 0) != (i & cm != 0) {
                self.data[i] = ZERO;
            }
        }
        Ok(())
    }

    pub fn outcome_probability(&self, q: usize, outcome: u8) -> Result<f64, StateError> {
        self.check_qubit(q)?;
        let dim = self.dim();
        let m = 1usize << (self.n - 1 - q);
        Ok((0..dim).filter(|i| (i & m != 0) == (outcome == 1)).map(|i| self.data[i * dim + i].re).sum())
    }

    /// Project `q` onto `outcome` and renormalize. Returns the probability.
    pub fn project(&mut self, q: usize, outcome: u8) -> Result<f64, StateError> {
        let p = self.outcome_probability(q, outcome)?;
        if p <= 1e-300 {
            return Err(StateError::ImpossibleOutcome { qubit: q, outcome });
        }
        let (rm, cm) = (1usize << self.row_pos(q), 1usize << self.col_pos(q));
        let want = outcome == 1;
        for i in 0..self.data.len() {
            if (i & rm != 0) != want || (i & cm != 0) != want {
                self.data[i] = ZERO;
            } else {
                self.data[i] /= p;
            }
        }
        Ok(p)
    }

    /// Apply `m` to `target` on the branch where `record` reads 1. Used for
    /// classically controlled corrections once `record` has been dephased.
    pub fn controlled_1q(&mut self, record: usize, target: usize, m: &Mat2) -> Result<(), StateError> {
        self.check_qubit(record)?;
        self.check_qubit(target)?;
        if record == target {
            return Err(StateError::DuplicateQubits(vec![record, target]));
        }
        let mut cm = [[ZERO; 4]; 4];
        cm[0][0] = ONE;
        cm[1][1] = ONE;
        cm[2][2] = m[0][0];
        cm[2][3] = m[0][1];
        cm[3][2] = m[1][0];
        cm[3][3] = m[1][1];
        let (ra, rb, ca, cb) = (self.row_pos(record), self.row_pos(target), self.col_pos(record), self.col_pos(target));
        apply_2q(&mut self.data, ra, rb, &cm);
        apply_2q(&mut self.data, ca, cb, &conj4(&cm));
        Ok(())
    }

    /// Replace the wires `targets` by `sigma`: `ρ → Tr_targets(ρ) ⊗ σ`.
    pub fn replace_qubits(&mut self, targets: &[usize], sigma: &DensityMatrix) -> Result<(), StateError> {
        if targets.len() != sigma.n {
            return Err(StateError::DimensionMismatch { left: targets.len(), right: sigma.n });
        }
        for (i, &q) in targets.iter().enumerate() {
            self.check_qubit(q)?;
            if targets[..i].contains(&q) {
                return Err(StateError::DuplicateQubits(targets.to_vec()));
            }
        }
        for &q in targets {
            self.reset_qubit(q)?;
        }
        let n = self.n;
        let m = targets.len();
        let bit = |q: usize| 1usize << (n - 1 - q);
        let mask: usize = targets.iter().fold(0, |acc, &q| acc | bit(q));
        let local = |x: usize| -> usize {
            targets.iter().enumerate().filter(|(_, &q)| x & bit(q) != 0).fold(0, |acc, (i, _)| acc | 1 << (m - 1 - i))
        };
        let dim = self.dim();
        let sd = sigma.dim();
        let old = std::mem::replace(&mut self.data, vec![ZERO; dim * dim]);
        for r in 0..dim {
            let (rb, rl) = (r & !mask, local(r));
            for c in 0..dim {
                let base = old[rb * dim + (c & !mask)];
                if base != ZERO {
                    self.data[r * dim + c] = base * sigma.data[rl * sd + local(c)];
                }
            }
        }
        Ok(())
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix, StateError> {
        if self.n != other.n {
            return Err(StateError::DimensionMismatch { left: self.n, right: other.n });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * w + b * (1.0 - w)).collect();
        Ok(DensityMatrix { n: self.n, data })
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.data[r * dim + c] - self.data[c * dim + r].conj()).norm());
            }
        }
        worst
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.data)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian, unit trace and positive semidefinite within the given
    /// tolerances.
    pub fn is_valid(&self, tol: f64, eig_tol: f64) -> bool {
        self.hermiticity_error() <= tol
            && (self.trace() - ONE).norm() <= tol
            && self.eigenvalues().first().is_some_and(|&e| e >= -eig_tol)
    }
}

/// Eigenvalues below this fraction of the largest are rounding noise. Their
/// square roots (about 1e-8 for noise of 1e-16) would otherwise leak into
/// the fidelity of rank-deficient states.
const EIG_CUTOFF: f64 = 1e-13;

fn clamp_noise(vals: &[f64]) -> impl Fn(f64) -> f64 {
    let floor = EIG_CUTOFF * vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    move |v| if v > floor { v.sqrt() } else { 0.0 }
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let root = clamp_noise(eig.eigenvalues.as_slice());
    let vals = eig.eigenvalues.map(|v| C64::new(root(v), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&vals) * v.adjoint()
}

/// Uhlmann fidelity `(Tr √(√σ ρ √σ))²`.
pub fn fidelity_general(ideal: &DensityMatrix, noisy: &DensityMatrix) -> Result<f64, StateError> {
    if ideal.n != noisy.n {
        return Err(StateError::DimensionMismatch { left: ideal.n, right: noisy.n });
    }
    let s = hermitian_sqrt(&ideal.to_nalgebra());
    let inner = &s * noisy.to_nalgebra() * &s;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let eig = inner.symmetric_eigenvalues();
    let root = clamp_noise(eig.as_slice());
    let tr: f64 = eig.iter().map(|&v| root(v)).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(ideal: &PureState, noisy: &DensityMatrix) -> Result<f64, StateError> {
    if ideal.n != noisy.n {
        return Err(StateError::DimensionMismatch { left: ideal.n, right: noisy.n });
    }
    let dim = noisy.dim();
    let mut acc = ZERO;
    for r in 0..dim {
        let a = ideal.amps[r].conj();
        if a == ZERO {
            continue;
        }
        let row = &noisy.data[r * dim..(r + 1) * dim];
        let s: C64 = row.iter().zip(&ideal.amps).map(|(x, b)| x * b).sum();
        acc += a * s;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}
