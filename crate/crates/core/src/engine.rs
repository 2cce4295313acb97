//! Event-timed density-matrix execution of distributed circuits.
//!
//! Every event occupies a time slot. After a slot, each live wire decoheres
//! for the slot duration. Wires are live while they carry quantum state:
//! processing wires always, communication wires from ebit delivery until
//! measurement, and no wire between its measurement and re-initialization.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{
    bell_mixture, noisy_cnot_in_place, werner, ChannelError, GateErrorParam, MemoryParam, WernerParam,
};
use crate::compiler::{count_events, DistributedCircuit, Event, Pauli, ResourceCount, Tag};
use crate::qasm::{Circuit, Op};
use crate::qstate::{
    fidelity_pure, BellKind, DensityMatrix, Gate, PureState, Role, StateError, DEFAULT_MAX_QUBITS, PAULI_X, PAULI_Z,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("simulation needs {needed} qubits but the cap is {cap}")]
    TooManyQubits { needed: usize, cap: usize },
    #[error("input has {got} qubits, circuit has {expected} processing qubits")]
    InputMismatch { expected: usize, got: usize },
    #[error("event {event}: ebit would overwrite wire {wire}, which still holds state")]
    CommOverwrite { event: usize, wire: usize },
    #[error("event {event}: measurement record for tag {tag} is not available")]
    MissingRecord { event: usize, tag: Tag },
    #[error("event {event}: forced outcome list is exhausted")]
    OutcomesExhausted { event: usize },
    #[error("event {event}: forced outcome has zero probability")]
    ImpossibleBranch { event: usize },
    #[error("invalid duration {name} = {value}")]
    BadDuration { name: &'static str, value: f64 },
}

/// Event durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationTable {
    pub t_1q: f64,
    pub t_2q: f64,
    pub t_meas: f64,
    pub t_ebit: f64,
    pub t_classical: f64,
}

pub const FIBRE_SPEED_M_PER_S: f64 = 2e8;

impl DurationTable {
    /// State-of-the-art trapped-ion values: ebit rate 182 Hz, 2 m link.
    pub fn state_of_the_art() -> Self {
        Self::from_rate_distance(182.0, 2.0)
    }

    pub fn from_rate_distance(ebit_rate_hz: f64, distance_m: f64) -> Self {
        DurationTable {
            t_1q: 135e-6,
            t_2q: 600e-6,
            t_meas: 6e-3,
            t_ebit: 1.0 / ebit_rate_hz,
            t_classical: distance_m / FIBRE_SPEED_M_PER_S,
        }
    }

    pub fn zero() -> Self {
        DurationTable { t_1q: 0.0, t_2q: 0.0, t_meas: 0.0, t_ebit: 0.0, t_classical: 0.0 }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [
            ("t_1q", self.t_1q),
            ("t_2q", self.t_2q),
            ("t_meas", self.t_meas),
            ("t_ebit", self.t_ebit),
            ("t_classical", self.t_classical),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(SimError::BadDuration { name, value });
            }
        }
        Ok(())
    }

    pub fn of(&self, ev: &Event) -> f64 {
        match ev {
            Event::Gate(g) if g.is_two_qubit() => self.t_2q,
            Event::Gate(_) | Event::Correction { .. } => self.t_1q,
            Event::EbitRequest { .. } => self.t_ebit,
            Event::Measure { .. } => self.t_meas,
            Event::ClassicalMessage { .. } => self.t_classical,
            Event::Reinit { .. } => 0.0,
        }
    }
}

impl Default for DurationTable {
    fn default() -> Self {
        Self::state_of_the_art()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementMode {
    /// Outcomes and their corrections folded into one deterministic channel.
    Mixture,
    /// One trajectory drawn from a seeded generator.
    Sampled { seed: u64 },
    /// Outcomes supplied in measurement order; the result carries the
    /// branch probability.
    Forced(Vec<u8>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// One global clock; every event gets its own slot.
    Sequential,
    /// Events touching disjoint wires share a slot lasting the longest member.
    Layered,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode `{0}`")]
pub struct UnknownMode(pub String);

impl FromStr for ScheduleMode {
    type Err = UnknownMode;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(ScheduleMode::Sequential),
            "layered" => Ok(ScheduleMode::Layered),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ScheduleMode::Sequential => "sequential",
            ScheduleMode::Layered => "layered",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub werner: WernerParam,
    pub gate_err: GateErrorParam,
    pub memory: MemoryParam,
    pub durations: DurationTable,
    pub measurement_mode: MeasurementMode,
    pub schedule_mode: ScheduleMode,
    /// Deliver this pure Bell state instead of a Werner state.
    pub ebit_override: Option<BellKind>,
    pub max_qubits: usize,
}

impl SimConfig {
    /// No errors of any kind, state-of-the-art durations.
    pub fn ideal() -> Self {
        SimConfig {
            werner: WernerParam::perfect(),
            gate_err: GateErrorParam::zero(),
            memory: MemoryParam::zero(),
            durations: DurationTable::state_of_the_art(),
            measurement_mode: MeasurementMode::Mixture,
            schedule_mode: ScheduleMode::Sequential,
            ebit_override: None,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }

    /// F_w = 0.94, ε_cnot = 0.004, r = 0.055 Hz.
    pub fn state_of_the_art() -> Self {
        SimConfig {
            werner: WernerParam::new(0.94).unwrap(),
            gate_err: GateErrorParam::new(0.004).unwrap(),
            memory: MemoryParam::new(0.055).unwrap(),
            ..Self::ideal()
        }
    }

    pub fn with_werner(mut self, f_w: f64) -> Result<Self, ChannelError> {
        self.werner = WernerParam::new(f_w)?;
        Ok(self)
    }

    pub fn with_gate_error(mut self, eps: f64) -> Result<Self, ChannelError> {
        self.gate_err = GateErrorParam::new(eps)?;
        Ok(self)
    }

    pub fn with_memory_rate(mut self, r: f64) -> Result<Self, ChannelError> {
        self.memory = MemoryParam::new(r)?;
        Ok(self)
    }

    pub fn with_measurement(mut self, m: MeasurementMode) -> Self {
        self.measurement_mode = m;
        self
    }

    pub fn with_schedule(mut self, s: ScheduleMode) -> Self {
        self.schedule_mode = s;
        self
    }

    pub fn with_ebit(mut self, kind: BellKind) -> Self {
        self.ebit_override = Some(kind);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub event_index: usize,
    pub event_kind: String,
    pub start_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// State of the logical qubits, in logical order.
    pub rho_out: DensityMatrix,
    pub elapsed: f64,
    pub telemetry: Vec<TelemetryRow>,
    pub resources: ResourceCount,
    /// Outcomes by tag; empty in mixture mode.
    pub outcomes: Vec<(Tag, u8)>,
    /// Probability of the realized branch; 1 in mixture mode.
    pub branch_probability: f64,
}

impl SimResult {
    pub fn telemetry_csv(&self) -> String {
        telemetry_csv(&self.telemetry)
    }
}

pub fn telemetry_csv(rows: &[TelemetryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// One time slot: its start, length and member events.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub start: f64,
    pub duration: f64,
    pub events: Vec<usize>,
}

/// Time slots for `events` under `mode`. Layered slots are ASAP layers over
/// wire and measurement-tag dependencies; an ebit request is never placed
/// before the event that precedes it in program order.
pub fn schedule(events: &[Event], durations: &DurationTable, mode: ScheduleMode) -> Vec<Slot> {
    let mut slots: Vec<Slot> = Vec::new();
    match mode {
        ScheduleMode::Sequential => {
            let mut t = 0.0;
            for (i, ev) in events.iter().enumerate() {
                let d = durations.of(ev);
                slots.push(Slot { start: t, duration: d, events: vec![i] });
                t += d;
            }
        }
        ScheduleMode::Layered => {
            let mut wire_layer: HashMap<usize, usize> = HashMap::new();
            let mut tag_layer: HashMap<Tag, usize> = HashMap::new();
            let mut tag_wire: HashMap<Tag, usize> = HashMap::new();
            let mut layers: Vec<Vec<usize>> = Vec::new();
            let mut prev_layer = 0;
            for (i, ev) in events.iter().enumerate() {
                let mut wires = ev.wires();
                let tags: Vec<Tag> = match ev {
                    Event::ClassicalMessage { tags, .. } => tags.clone(),
                    Event::Correction { tag, .. } => vec![*tag],
                    _ => Vec::new(),
                };
                // The record wire must not be reset before its readers run.
                wires.extend(tags.iter().filter_map(|t| tag_wire.get(t)));
                let after = wires
                    .iter()
                    .filter_map(|w| wire_layer.get(w))
                    .chain(tags.iter().filter_map(|t| tag_layer.get(t)))
                    .map(|&l| l + 1)
                    .max()
                    .unwrap_or(0);
                let layer = match ev {
                    Event::EbitRequest { .. } => after.max(prev_layer),
                    _ => after,
                };
                for w in &wires {
                    wire_layer.insert(*w, layer);
                }
                for t in &tags {
                    tag_layer.insert(*t, layer);
                }
                if let Event::Measure { qubit, tag } = ev {
                    tag_layer.insert(*tag, layer);
                    tag_wire.insert(*tag, *qubit);
                }
                if layers.len() <= layer {
                    layers.resize(layer + 1, Vec::new());
                }
                layers[layer].push(i);
                prev_layer = layer;
            }
            let mut t = 0.0;
            for evs in layers {
                let d = evs.iter().map(|&i| durations.of(&events[i])).fold(0.0, f64::max);
                slots.push(Slot { start: t, duration: d, events: evs });
                t += d;
            }
        }
    }
    slots
}

/// Total simulated time of `dc` under the configured schedule.
pub fn elapsed_time(dc: &DistributedCircuit, cfg: &SimConfig) -> f64 {
    schedule(&dc.events, &cfg.durations, cfg.schedule_mode).iter().map(|s| s.duration).sum()
}

/// Noise-free monolithic output.
pub fn ideal_output(c: &Circuit, input: &PureState) -> Result<PureState, SimError> {
    if input.n_qubits() != c.n_qubits {
        return Err(SimError::InputMismatch { expected: c.n_qubits, got: input.n_qubits() });
    }
    let mut psi = input.clone();
    for op in &c.ops {
        if let Op::Gate(g) = op {
            psi.apply_gate(g)?;
        }
    }
    Ok(psi)
}

/// Noise-free output of the monolithic circuit `dc` was compiled from.
pub fn ideal_output_dc(dc: &DistributedCircuit, input: &PureState) -> Result<PureState, SimError> {
    ideal_output(&dc.source, input)
}

enum Records {
    /// Tag to the wire holding the dephased outcome.
    Quantum(HashMap<Tag, usize>),
    Classical(HashMap<Tag, u8>),
}

struct Runner<'a> {
    cfg: &'a SimConfig,
    rho: DensityMatrix,
    /// Physical wire to simulation wire.
    sim: HashMap<usize, usize>,
    live: Vec<bool>,
    holds: Vec<bool>,
    is_processing: Vec<bool>,
    records: Records,
    rng: Option<ChaCha8Rng>,
    forced: Option<(&'a [u8], usize)>,
    outcomes: Vec<(Tag, u8)>,
    branch_probability: f64,
    ebit: DensityMatrix,
}

impl Runner<'_> {
    fn w(&self, physical: usize) -> usize {
        self.sim[&physical]
    }

    fn run_event(&mut self, i: usize, ev: &Event) -> Result<(), SimError> {
        match ev {
            Event::Gate(g) => {
                let g = g.remap(|q| self.sim[&q]);
                match g {
                    Gate::Cnot { control, target } => {
                        noisy_cnot_in_place(&mut self.rho, control, target, self.cfg.gate_err)?
                    }
                    _ if g.is_two_qubit() => {
                        self.rho.apply_gate_in_place(&g)?;
                        let t = g.targets();
                        if self.cfg.gate_err.value() > 0.0 {
                            self.rho.depolarize_pair(t[0], t[1], self.cfg.gate_err.value())?;
                        }
                    }
                    _ => self.rho.apply_gate_in_place(&g)?,
                }
                for q in g.targets() {
                    self.holds[q] = true;
                }
            }
            Event::EbitRequest { comm_a, comm_b } => {
                let (a, b) = (self.w(*comm_a), self.w(*comm_b));
                for q in [a, b] {
                    if self.holds[q] {
                        return Err(SimError::CommOverwrite { event: i, wire: q });
                    }
                }
                self.rho.replace_qubits(&[a, b], &self.ebit)?;
                for q in [a, b] {
                    self.holds[q] = true;
                    self.live[q] = true;
                }
            }
            Event::Measure { qubit, tag } => {
                let q = self.w(*qubit);
                match &mut self.records {
                    Records::Quantum(map) => {
                        self.rho.dephase_qubit(q)?;
                        map.insert(*tag, q);
                    }
                    Records::Classical(map) => {
                        let outcome = if let Some((list, pos)) = &mut self.forced {
                            let o = *list.get(*pos).ok_or(SimError::OutcomesExhausted { event: i })?;
                            *pos += 1;
                            o
                        } else {
                            let p1 = self.rho.outcome_probability(q, 1)?;
                            let rng = self.rng.as_mut().expect("sampled mode has a generator");
                            u8::from(rng.gen::<f64>() < p1)
                        };
                        let p = self.rho.project(q, outcome).map_err(|_| SimError::ImpossibleBranch { event: i })?;
                        self.branch_probability *= p;
                        map.insert(*tag, outcome);
                        self.outcomes.push((*tag, outcome));
                    }
                }
                self.live[q] = false;
                self.holds[q] = true;
            }
            Event::ClassicalMessage { .. } => {}
            Event::Correction { pauli, qubit, tag } => {
                let q = self.w(*qubit);
                let m = match pauli {
                    Pauli::X => PAULI_X,
                    Pauli::Z => PAULI_Z,
                };
                match &self.records {
                    Records::Quantum(map) => {
                        let rec = *map.get(tag).ok_or(SimError::MissingRecord { event: i, tag: *tag })?;
                        self.rho.controlled_1q(rec, q, &m)?;
                    }
                    Records::Classical(map) => {
                        if *map.get(tag).ok_or(SimError::MissingRecord { event: i, tag: *tag })? == 1 {
                            self.rho.apply_unitary_1q(q, &m);
                        }
                    }
                }
            }
            Event::Reinit { qubit } => {
                let q = self.w(*qubit);
                self.rho.reset_qubit(q)?;
                if let Records::Quantum(map) = &mut self.records {
                    map.retain(|_, w| *w != q);
                }
                self.holds[q] = false;
                self.live[q] = self.is_processing[q];
            }
        }
        Ok(())
    }

    fn decohere(&mut self, dt: f64, fresh: &[usize]) -> Result<(), SimError> {
        if self.cfg.memory.rate() == 0.0 {
            return Ok(());
        }
        for q in 0..self.live.len() {
            if !self.live[q] {
                continue;
            }
            // Ebits delivered in this slot only exist for its tail.
            let t = if fresh.contains(&q) { (dt - self.cfg.durations.t_ebit).max(0.0) } else { dt };
            let p = 1.0 - self.cfg.memory.survival(t);
            if p > 0.0 {
                self.rho.depolarize_qubit(q, p)?;
            }
        }
        Ok(())
    }
}

/// Simulation wires: every processing wire plus each communication wire an
/// event touches, in physical order.
fn active_wires(dc: &DistributedCircuit) -> Vec<usize> {
    let mut used = vec![false; dc.n_wires()];
    for (w, r) in dc.wires.iter().enumerate() {
        used[w] = r.role == Role::Processing;
    }
    for ev in &dc.events {
        for w in ev.wires() {
            used[w] = true;
        }
    }
    (0..dc.n_wires()).filter(|&w| used[w]).collect()
}

/// Execute `dc` on `input` (over the processing qubits) under `cfg`.
pub fn simulate(dc: &DistributedCircuit, input: &PureState, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.durations.validate()?;
    if input.n_qubits() != dc.n_processing {
        return Err(SimError::InputMismatch { expected: dc.n_processing, got: input.n_qubits() });
    }
    let wires = active_wires(dc);
    if wires.len() > cfg.max_qubits {
        return Err(SimError::TooManyQubits { needed: wires.len(), cap: cfg.max_qubits });
    }
    let sim: HashMap<usize, usize> = wires.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let is_processing: Vec<bool> = wires.iter().map(|&w| dc.wires[w].role == Role::Processing).collect();
    let rho = DensityMatrix::from_pure(&input.pad_zeros(wires.len() - dc.n_processing));
    let ebit = match cfg.ebit_override {
        Some(kind) => {
            let mut w = [0.0; 4];
            w[BellKind::ALL.iter().position(|&k| k == kind).unwrap()] = 1.0;
            bell_mixture(w)
        }
        None => werner(cfg.werner),
    };
    let (records, rng, forced) = match &cfg.measurement_mode {
        MeasurementMode::Mixture => (Records::Quantum(HashMap::new()), None, None),
        MeasurementMode::Sampled { seed } => {
            (Records::Classical(HashMap::new()), Some(ChaCha8Rng::seed_from_u64(*seed)), None)
        }
        MeasurementMode::Forced(list) => (Records::Classical(HashMap::new()), None, Some((list.as_slice(), 0))),
    };
    let mut r = Runner {
        cfg,
        rho,
        sim,
        live: is_processing.clone(),
        holds: is_processing.clone(),
        is_processing,
        records,
        rng,
        forced,
        outcomes: Vec::new(),
        branch_probability: 1.0,
        ebit,
    };

    let slots = schedule(&dc.events, &cfg.durations, cfg.schedule_mode);
    let mut telemetry = vec![None; dc.events.len()];
    for slot in &slots {
        let mut fresh = Vec::new();
        for &i in &slot.events {
            let ev = &dc.events[i];
            r.run_event(i, ev)?;
            if let Event::EbitRequest { comm_a, comm_b } = ev {
                fresh.push(r.w(*comm_a));
                fresh.push(r.w(*comm_b));
            }
            telemetry[i] = Some(TelemetryRow {
                event_index: i,
                event_kind: ev.kind().to_string(),
                start_s: slot.start,
                duration_s: cfg.durations.of(ev),
            });
        }
        r.decohere(slot.duration, &fresh)?;
    }

    let keep: Vec<usize> = dc.result_location.iter().map(|w| r.sim[w]).collect();
    let rho_out = if keep.is_empty() { r.rho.clone() } else { r.rho.partial_trace(&keep)? };
    Ok(SimResult {
        rho_out,
        elapsed: slots.iter().map(|s| s.duration).sum(),
        telemetry: telemetry.into_iter().map(|t| t.expect("every event scheduled")).collect(),
        resources: count_events(&dc.events),
        outcomes: r.outcomes,
        branch_probability: r.branch_probability,
    })
}

/// `⟨ψ_ideal| ρ_out |ψ_ideal⟩` for `dc` on `input` under `cfg`.
pub fn output_fidelity(dc: &DistributedCircuit, input: &PureState, cfg: &SimConfig) -> Result<f64, SimError> {
    let ideal = ideal_output_dc(dc, input)?;
    let res = simulate(dc, input, cfg)?;
    Ok(fidelity_pure(&ideal, &res.rho_out)?)
}

/// Every measurement-outcome branch with nonzero probability, simulated in
/// forced mode. The configured measurement mode is ignored.
pub fn simulate_branches(
    dc: &DistributedCircuit,
    input: &PureState,
    cfg: &SimConfig,
) -> Result<Vec<(Vec<u8>, SimResult)>, SimError> {
    let n_meas = count_events(&dc.events).n_meas;
    let mut out = Vec::new();
    for bits in 0..1u64 << n_meas {
        let outcomes: Vec<u8> = (0..n_meas).map(|k| ((bits >> (n_meas - 1 - k)) & 1) as u8).collect();
        let c = cfg.clone().with_measurement(MeasurementMode::Forced(outcomes.clone()));
        match simulate(dc, input, &c) {
            Ok(res) => out.push((outcomes, res)),
            Err(SimError::ImpossibleBranch { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
