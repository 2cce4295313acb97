//! Bipartitioning and remote-gate lowering.
//!
//! Physical wire layout of a compiled circuit: processing wires `0..n`, then
//! communication wires A0, A1, B0, B1 at `n..n+4`. Monolithic compilation has
//! no communication wires. Remote gates are lowered one at a time in program
//! order; logical qubits may migrate onto communication wires under 1TP and
//! 2TP, which is tracked by a location map.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qasm::{lower_to_basis, Circuit, Op};
use crate::qstate::{Gate, QubitRef, Role, Site};
use std::f64::consts::PI;

pub const COMM_PER_QPU: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("cannot partition a circuit with no qubits")]
    NoQubits,
    #[error("partition covers {partition} qubits but the circuit has {circuit}")]
    PartitionMismatch { partition: usize, circuit: usize },
    #[error("scheme {scheme} is inapplicable at gate {gate_index}: {reason}")]
    SchemeInapplicable { scheme: Scheme, gate_index: usize, reason: String },
    #[error("no free communication qubit on QPU {site} at gate {gate_index}")]
    CommBudgetExhausted { site: Site, gate_index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scheme {
    Monolithic,
    CatComm,
    OneTp,
    TwoTp,
    TpSafe,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Monolithic, Scheme::CatComm, Scheme::OneTp, Scheme::TwoTp, Scheme::TpSafe];
    pub const DISTRIBUTED: [Scheme; 4] = [Scheme::CatComm, Scheme::OneTp, Scheme::TwoTp, Scheme::TpSafe];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Monolithic => "monolithic",
            Scheme::CatComm => "cat-comm",
            Scheme::OneTp => "1tp",
            Scheme::TwoTp => "2tp",
            Scheme::TpSafe => "tp-safe",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scheme `{0}` (expected monolithic, cat-comm, 1tp, 2tp or tp-safe)")]
pub struct UnknownScheme(pub String);

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.as_str().to_string()
    }
}

impl TryFrom<String> for Scheme {
    type Error = UnknownScheme;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Scheme {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "monolithic" | "mono" => Ok(Scheme::Monolithic),
            "cat-comm" | "cat" | "catcomm" => Ok(Scheme::CatComm),
            "1tp" | "one-tp" | "onetp" => Ok(Scheme::OneTp),
            "2tp" | "two-tp" | "twotp" => Ok(Scheme::TwoTp),
            "tp-safe" | "tpsafe" => Ok(Scheme::TpSafe),
            _ => Err(UnknownScheme(s.to_string())),
        }
    }
}

/// Processing-qubit assignment. Low indices go to QPU A, which takes the
/// extra qubit when `n` is odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<Site>,
}

impl Partition {
    pub fn n_qubits(&self) -> usize {
        self.assignment.len()
    }

    pub fn site(&self, q: usize) -> Site {
        self.assignment[q]
    }

    pub fn qubits_on(&self, site: Site) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&q| self.assignment[q] == site).collect()
    }
}

pub fn partition(n_processing: usize) -> Result<Partition, CompileError> {
    if n_processing == 0 {
        return Err(CompileError::NoQubits);
    }
    let n_a = n_processing.div_ceil(2);
    let assignment = (0..n_processing).map(|q| if q < n_a { Site::QpuA } else { Site::QpuB }).collect();
    Ok(Partition { assignment })
}

/// Op indices of CNOTs whose endpoints lie on different QPUs under `p`.
pub fn detect_remote(c: &Circuit, p: &Partition) -> Vec<usize> {
    c.ops
        .iter()
        .enumerate()
        .filter_map(|(i, op)| match op {
            Op::Gate(Gate::Cnot { control, target }) if p.site(*control) != p.site(*target) => Some(i),
            _ => None,
        })
        .collect()
}

pub type Tag = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn gate(self, q: usize) -> Gate {
        match self {
            Pauli::X => Gate::X(q),
            Pauli::Z => Gate::Z(q),
        }
    }
}

/// One step of a distributed circuit. Wire indices are physical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Event {
    Gate(Gate),
    /// Fresh ebit on one communication wire per QPU.
    EbitRequest {
        comm_a: usize,
        comm_b: usize,
    },
    Measure {
        qubit: usize,
        tag: Tag,
    },
    ClassicalMessage {
        from: Site,
        to: Site,
        tags: Vec<Tag>,
    },
    /// Pauli on `qubit` when the outcome behind `tag` is 1.
    Correction {
        pauli: Pauli,
        qubit: usize,
        tag: Tag,
    },
    Reinit {
        qubit: usize,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Gate(g) if g.is_two_qubit() => "cnot",
            Event::Gate(_) => "gate_1q",
            Event::EbitRequest { .. } => "ebit",
            Event::Measure { .. } => "measure",
            Event::ClassicalMessage { .. } => "message",
            Event::Correction { .. } => "correction",
            Event::Reinit { .. } => "reinit",
        }
    }

    /// Physical wires read or written.
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Event::Gate(g) => g.targets(),
            Event::EbitRequest { comm_a, comm_b } => vec![*comm_a, *comm_b],
            Event::Measure { qubit, .. } | Event::Reinit { qubit } | Event::Correction { qubit, .. } => vec![*qubit],
            Event::ClassicalMessage { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceCount {
    pub n_cnot: usize,
    pub n_ebit: usize,
    pub n_meas: usize,
    pub n_classical_msgs: usize,
}

/// A remote CNOT as seen by the lowering pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteGate {
    /// Index into the basis-lowered source circuit.
    pub op_index: usize,
    pub control: usize,
    pub target: usize,
    pub control_site: Site,
    /// Range of emitted events implementing this gate.
    pub events: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedCircuit {
    pub scheme: Scheme,
    pub n_processing: usize,
    pub partition: Option<Partition>,
    /// Placement of every physical wire; position equals wire index.
    pub wires: Vec<QubitRef>,
    pub events: Vec<Event>,
    /// Physical wire holding each logical qubit at the end.
    pub result_location: Vec<usize>,
    pub remote_gates: Vec<RemoteGate>,
    /// The basis-lowered monolithic circuit this was compiled from.
    pub source: Circuit,
}

impl DistributedCircuit {
    pub fn n_wires(&self) -> usize {
        self.wires.len()
    }

    pub fn site_of(&self, wire: usize) -> Site {
        self.wires[wire].site
    }

    /// Check the structural invariants: local gates stay on one QPU, ebits
    /// pair an A and a B communication wire, corrections follow their
    /// measurement, and no ebit lands on a wire still holding state.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let n = self.wires.len();
        let mut measured_tags = std::collections::HashSet::new();
        let mut busy = vec![false; n];
        for (i, ev) in self.events.iter().enumerate() {
            if let Some(&w) = ev.wires().iter().find(|&&w| w >= n) {
                return Err(format!("event {i}: wire {w} out of range"));
            }
            match ev {
                Event::Gate(g) => {
                    let sites: Vec<Site> = g.targets().iter().map(|&w| self.site_of(w)).collect();
                    if sites.windows(2).any(|s| s[0] != s[1]) {
                        return Err(format!("event {i}: gate spans two QPUs"));
                    }
                    for w in g.targets() {
                        busy[w] = true;
                    }
                }
                Event::EbitRequest { comm_a, comm_b } => {
                    for (w, site) in [(*comm_a, Site::QpuA), (*comm_b, Site::QpuB)] {
                        let r = self.wires[w];
                        if r.role != Role::Communication || r.site != site {
                            return Err(format!("event {i}: ebit endpoint {w} is not a QPU {site} comm qubit"));
                        }
                        if busy[w] {
                            return Err(format!("event {i}: ebit overwrites live wire {w}"));
                        }
                        busy[w] = true;
                    }
                }
                Event::Measure { tag, .. } => {
                    if !measured_tags.insert(*tag) {
                        return Err(format!("event {i}: tag {tag} produced twice"));
                    }
                }
                Event::Correction { tag, .. } => {
                    if !measured_tags.contains(tag) {
                        return Err(format!("event {i}: correction uses unknown tag {tag}"));
                    }
                }
                Event::ClassicalMessage { tags, .. } => {
                    if let Some(t) = tags.iter().find(|t| !measured_tags.contains(t)) {
                        return Err(format!("event {i}: message carries unknown tag {t}"));
                    }
                }
                Event::Reinit { qubit } => busy[*qubit] = false,
            }
        }
        Ok(())
    }
}

pub fn count_resources(dc: &DistributedCircuit) -> ResourceCount {
    count_events(&dc.events)
}

pub fn count_events(events: &[Event]) -> ResourceCount {
    let mut rc = ResourceCount::default();
    for ev in events {
        match ev {
            Event::Gate(g) if g.is_two_qubit() => rc.n_cnot += 1,
            Event::EbitRequest { .. } => rc.n_ebit += 1,
            Event::Measure { .. } => rc.n_meas += 1,
            Event::ClassicalMessage { .. } => rc.n_classical_msgs += 1,
            _ => {}
        }
    }
    rc
}

fn h(q: usize) -> Gate {
    Gate::U3 { theta: PI / 2.0, phi: 0.0, lambda: PI, q }
}

fn cx(control: usize, target: usize) -> Gate {
    Gate::Cnot { control, target }
}

struct Lowering {
    scheme: Scheme,
    n: usize,
    wires: Vec<QubitRef>,
    /// Logical qubit to physical wire.
    loc: Vec<usize>,
    /// Communication wires holding a migrated logical qubit.
    holds_logical: [bool; 2 * COMM_PER_QPU],
    events: Vec<Event>,
    next_tag: Tag,
}

impl Lowering {
    fn comm_wire(&self, site: Site, k: usize) -> usize {
        match site {
            Site::QpuA => self.n + k,
            _ => self.n + COMM_PER_QPU + k,
        }
    }

    fn comm_slot(&self, wire: usize) -> Option<usize> {
        (wire >= self.n).then(|| wire - self.n)
    }

    /// Lowest-index communication wire on `site` not holding state and not in `exclude`.
    fn alloc(&self, site: Site, exclude: &[usize], gate_index: usize) -> Result<usize, CompileError> {
        (0..COMM_PER_QPU)
            .map(|k| self.comm_wire(site, k))
            .find(|w| !self.holds_logical[w - self.n] && !exclude.contains(w))
            .ok_or_else(|| match self.scheme {
                Scheme::OneTp | Scheme::TwoTp => CompileError::SchemeInapplicable {
                    scheme: self.scheme,
                    gate_index,
                    reason: format!("every communication qubit on QPU {site} holds a teleported state"),
                },
                _ => CompileError::CommBudgetExhausted { site, gate_index },
            })
    }

    fn tag(&mut self) -> Tag {
        self.next_tag += 1;
        self.next_tag - 1
    }

    fn emit(&mut self, ev: Event) {
        self.events.push(ev);
    }

    fn site(&self, wire: usize) -> Site {
        self.wires[wire].site
    }

    fn set_logical(&mut self, logical: usize, wire: usize) {
        let old = self.loc[logical];
        if let Some(s) = self.comm_slot(old) {
            self.holds_logical[s] = false;
        }
        if let Some(s) = self.comm_slot(wire) {
            self.holds_logical[s] = true;
        }
        self.loc[logical] = wire;
    }

    /// Teleport the state on `src` to a fresh comm wire on the other QPU.
    /// `exclude` lists comm wires that must not be allocated.
    fn teleport(&mut self, src: usize, exclude: &[usize], gate_index: usize) -> Result<usize, CompileError> {
        let from = self.site(src);
        let to = from.other();
        let cs = self.alloc(from, exclude, gate_index)?;
        let ct = self.alloc(to, exclude, gate_index)?;
        self.emit(ebit(self, cs, ct));
        self.emit(Event::Gate(cx(src, cs)));
        self.emit(Event::Gate(h(src)));
        let (m1, m2) = (self.tag(), self.tag());
        self.emit(Event::Measure { qubit: src, tag: m1 });
        self.emit(Event::Measure { qubit: cs, tag: m2 });
        self.emit(Event::ClassicalMessage { from, to, tags: vec![m1, m2] });
        self.emit(Event::Correction { pauli: Pauli::X, qubit: ct, tag: m2 });
        self.emit(Event::Correction { pauli: Pauli::Z, qubit: ct, tag: m1 });
        self.emit(Event::Reinit { qubit: src });
        self.emit(Event::Reinit { qubit: cs });
        Ok(ct)
    }

    fn remote_cnot(&mut self, control: usize, target: usize, gate_index: usize) -> Result<(), CompileError> {
        let (cw, tw) = (self.loc[control], self.loc[target]);
        let from = self.site(cw);
        let to = from.other();
        match self.scheme {
            Scheme::Monolithic => unreachable!("monolithic has no remote gates"),
            Scheme::CatComm => {
                let cs = self.alloc(from, &[], gate_index)?;
                let ct = self.alloc(to, &[], gate_index)?;
                self.emit(ebit(self, cs, ct));
                self.emit(Event::Gate(cx(cw, cs)));
                let m1 = self.tag();
                self.emit(Event::Measure { qubit: cs, tag: m1 });
                self.emit(Event::ClassicalMessage { from, to, tags: vec![m1] });
                self.emit(Event::Correction { pauli: Pauli::X, qubit: ct, tag: m1 });
                self.emit(Event::Reinit { qubit: cs });
                self.emit(Event::Gate(cx(ct, tw)));
                self.emit(Event::Gate(h(ct)));
                let m2 = self.tag();
                self.emit(Event::Measure { qubit: ct, tag: m2 });
                self.emit(Event::ClassicalMessage { from: to, to: from, tags: vec![m2] });
                self.emit(Event::Correction { pauli: Pauli::Z, qubit: cw, tag: m2 });
                self.emit(Event::Reinit { qubit: ct });
            }
            Scheme::OneTp | Scheme::TwoTp | Scheme::TpSafe => {
                let ct = self.teleport(cw, &[], gate_index)?;
                self.set_logical(control, ct);
                self.emit(Event::Gate(cx(ct, tw)));
                if self.scheme == Scheme::OneTp {
                    return Ok(());
                }
                // Teleport back; `ct` stays reserved so the extra comm on
                // the far QPU is used for the second ebit.
                let back = self.teleport(ct, &[ct], gate_index)?;
                self.set_logical(control, back);
                if self.scheme == Scheme::TpSafe {
                    // `cw` was measured and reset during the first teleport.
                    self.emit(Event::Gate(cx(back, cw)));
                    self.emit(Event::Gate(cx(cw, back)));
                    self.emit(Event::Gate(cx(back, cw)));
                    self.set_logical(control, cw);
                    self.emit(Event::Reinit { qubit: back });
                }
            }
        }
        Ok(())
    }
}

fn ebit(l: &Lowering, x: usize, y: usize) -> Event {
    if l.site(x) == Site::QpuA {
        Event::EbitRequest { comm_a: x, comm_b: y }
    } else {
        Event::EbitRequest { comm_a: y, comm_b: x }
    }
}

/// Lower every remote CNOT of `c` with scheme `s`. The circuit is first
/// lowered to the U3 + CNOT basis; reported gate indices refer to that
/// lowered circuit. Measurements and barriers are dropped.
pub fn lower_remote(c: &Circuit, p: &Partition, s: Scheme) -> Result<DistributedCircuit, CompileError> {
    let source = lower_to_basis(c);
    let n = c.n_qubits;
    if s != Scheme::Monolithic && p.n_qubits() != n {
        return Err(CompileError::PartitionMismatch { partition: p.n_qubits(), circuit: n });
    }
    let mut wires: Vec<QubitRef> = if s == Scheme::Monolithic {
        (0..n).map(|q| QubitRef::processing(q, Site::Monolithic)).collect()
    } else {
        (0..n).map(|q| QubitRef::processing(q, p.site(q))).collect()
    };
    if s != Scheme::Monolithic {
        for site in [Site::QpuA, Site::QpuB] {
            for _ in 0..COMM_PER_QPU {
                let idx = wires.len();
                wires.push(QubitRef::communication(idx, site));
            }
        }
    }
    let mut l = Lowering {
        scheme: s,
        n,
        wires,
        loc: (0..n).collect(),
        holds_logical: [false; 2 * COMM_PER_QPU],
        events: Vec::new(),
        next_tag: 0,
    };
    let mut remote_gates = Vec::new();
    for (i, op) in source.ops.iter().enumerate() {
        let Op::Gate(g) = op else { continue };
        match *g {
            Gate::Cnot { control, target } if l.site(l.loc[control]) != l.site(l.loc[target]) => {
                let start = l.events.len();
                let control_site = l.site(l.loc[control]);
                l.remote_cnot(control, target, i)?;
                remote_gates.push(RemoteGate {
                    op_index: i,
                    control,
                    target,
                    control_site,
                    events: (start, l.events.len()),
                });
            }
            _ => {
                let loc = &l.loc;
                l.events.push(Event::Gate(g.remap(|q| loc[q])));
            }
        }
    }
    Ok(DistributedCircuit {
        scheme: s,
        n_processing: n,
        partition: (s != Scheme::Monolithic).then(|| p.clone()),
        wires: l.wires,
        events: l.events,
        result_location: l.loc,
        remote_gates,
        source,
    })
}

/// Partition with [`partition`] and lower with scheme `s`.
pub fn compile(c: &Circuit, s: Scheme) -> Result<DistributedCircuit, CompileError> {
    let p = partition(c.n_qubits)?;
    lower_remote(c, &p, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteGateReport {
    pub op_index: usize,
    pub control: usize,
    pub target: usize,
    pub control_site: String,
    pub template: Vec<String>,
}

/// Human- and machine-readable summary of a compilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub circuit: String,
    pub scheme: Scheme,
    pub n_processing: usize,
    pub qpu_a: Vec<usize>,
    pub qpu_b: Vec<usize>,
    pub remote_gates: Vec<RemoteGateReport>,
    pub resources: ResourceCount,
    pub result_location: Vec<usize>,
    pub n_events: usize,
}

pub fn describe_event(ev: &Event) -> String {
    match ev {
        Event::Gate(Gate::Cnot { control, target }) => format!("cx {control},{target}"),
        Event::Gate(Gate::U3 { theta, phi, lambda, q }) => format!("u3({theta:.6},{phi:.6},{lambda:.6}) {q}"),
        Event::Gate(g) => format!("{} {:?}", g.name(), g.targets()),
        Event::EbitRequest { comm_a, comm_b } => format!("ebit {comm_a},{comm_b}"),
        Event::Measure { qubit, tag } => format!("measure {qubit} -> m{tag}"),
        Event::ClassicalMessage { from, to, tags } => {
            let t: Vec<String> = tags.iter().map(|t| format!("m{t}")).collect();
            format!("send {from}->{to} [{}]", t.join(","))
        }
        Event::Correction { pauli, qubit, tag } => format!("if m{tag} {pauli:?} {qubit}"),
        Event::Reinit { qubit } => format!("reinit {qubit}"),
    }
}

impl CompileReport {
    pub fn new(dc: &DistributedCircuit) -> Self {
        let (qpu_a, qpu_b) = match &dc.partition {
            Some(p) => (p.qubits_on(Site::QpuA), p.qubits_on(Site::QpuB)),
            None => ((0..dc.n_processing).collect(), Vec::new()),
        };
        let remote_gates = dc
            .remote_gates
            .iter()
            .map(|r| RemoteGateReport {
                op_index: r.op_index,
                control: r.control,
                target: r.target,
                control_site: r.control_site.to_string(),
                template: dc.events[r.events.0..r.events.1].iter().map(describe_event).collect(),
            })
            .collect();
        CompileReport {
            circuit: dc.source.name.clone(),
            scheme: dc.scheme,
            n_processing: dc.n_processing,
            qpu_a,
            qpu_b,
            remote_gates,
            resources: count_resources(dc),
            result_location: dc.result_location.clone(),
            n_events: dc.events.len(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
