//! Batch experiments: error-parameter and input-state sweeps over one or
//! more schemes, with CSV and JSON output.
//!
//! Grid points are independent and evaluated in parallel; rows always come
//! back in declared order (scheme, then error point, then input point).

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::analysis::{build_input_state, delta_oe, first_order, ApproxKind, InputStateParams};
use crate::channels::ChannelError;
use crate::compiler::{compile, CompileError, CompileReport, DistributedCircuit, Scheme};
use crate::engine::{ideal_output_dc, simulate, DurationTable, MeasurementMode, ScheduleMode, SimConfig, SimError};
use crate::qasm::{parse_qasm_named, Circuit, ParseError};
use crate::qstate::{fidelity_pure, PureState, C64};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "QDC_WORKERS";
/// First line of every CSV this module writes.
pub const SWEEP_CSV_VERSION: &str = "# qdc sweep csv v1";
pub const COMPARE_CSV_VERSION: &str = "# qdc compare csv v1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Qasm { path: String, source: ParseError },
    #[error("spec file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("{scheme}: {source}")]
    Compile { scheme: Scheme, source: CompileError },
    #[error("grid point {point}: {source}")]
    Sim { point: String, source: SimError },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Named parameter sets for the three error types plus durations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub name: &'static str,
    pub f_w: f64,
    pub eps_cnot: f64,
    pub r: f64,
    pub durations: DurationTable,
}

impl Profile {
    pub const NAMES: [&'static str; 3] = ["table1-soa", "distilled", "noiseless"];

    pub fn state_of_the_art() -> Self {
        Profile {
            name: "table1-soa",
            f_w: 0.94,
            eps_cnot: 0.004,
            r: 0.055,
            durations: DurationTable::state_of_the_art(),
        }
    }

    /// Entanglement error one order of magnitude below the state of the art.
    pub fn distilled() -> Self {
        let t = Self::state_of_the_art();
        Profile { name: "distilled", f_w: 1.0 - 0.1 * (1.0 - t.f_w), ..t }
    }

    pub fn noiseless() -> Self {
        Profile { name: "noiseless", f_w: 1.0, eps_cnot: 0.0, r: 0.0, ..Self::state_of_the_art() }
    }

    pub fn by_name(name: &str) -> Result<Self, ExperimentError> {
        match name {
            "table1-soa" | "table1" => Ok(Self::state_of_the_art()),
            "distilled" => Ok(Self::distilled()),
            "noiseless" => Ok(Self::noiseless()),
            _ => Err(ExperimentError::Invalid(format!(
                "unknown profile `{name}` (expected one of {})",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Cartesian product of all error lists.
    #[default]
    Product,
    /// Each listed error type varies alone; the other two are zero.
    EachAlone,
}

/// Error-parameter lists. Absent lists take the profile value (product
/// mode) or are skipped (each-alone mode). `eps_ebit` is an alternative
/// spelling of `f_w` as `1 - F_w`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorGrid {
    #[serde(default)]
    pub mode: GridMode,
    pub f_w: Option<Vec<f64>>,
    pub eps_ebit: Option<Vec<f64>>,
    pub eps_cnot: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
}

/// Input-state lists; the state family is applied to wires 0 (control
/// factor) and 1 (target factor), other wires start in |0⟩.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputGrid {
    pub alpha_sq: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationOverride {
    pub t_1q: Option<f64>,
    pub t_2q: Option<f64>,
    pub t_meas: Option<f64>,
    pub ebit_rate_hz: Option<f64>,
    pub distance_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementKind {
    #[default]
    Mixture,
    Sampled,
}

fn default_circuit() -> String {
    "remote-cnot".into()
}

fn default_profile() -> String {
    "table1-soa".into()
}

fn default_schemes() -> Vec<String> {
    Scheme::ALL.iter().map(|s| s.as_str().to_string()).collect()
}

/// A whole experiment, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    /// Built-in template (`remote-cnot`, `remote-chain:K`) or a QASM path.
    #[serde(default = "default_circuit")]
    pub circuit: String,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub grid: ErrorGrid,
    #[serde(default)]
    pub inputs: InputGrid,
    #[serde(default)]
    pub durations: DurationOverride,
    #[serde(default)]
    pub measurement_mode: MeasurementKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_schedule")]
    pub schedule_mode: ScheduleMode,
    pub output: Option<PathBuf>,
    /// Directory that relative circuit paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_schedule() -> ScheduleMode {
    ScheduleMode::Sequential
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })?;
        let mut spec = Self::from_toml(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>, ExperimentError> {
        if self.schemes.is_empty() {
            return Err(ExperimentError::Invalid("scheme list is empty".into()));
        }
        self.schemes.iter().map(|s| s.parse::<Scheme>().map_err(|e| ExperimentError::Invalid(e.to_string()))).collect()
    }

    pub fn profile(&self) -> Result<Profile, ExperimentError> {
        Profile::by_name(&self.profile)
    }

    pub fn durations(&self) -> Result<DurationTable, ExperimentError> {
        let o = &self.durations;
        let base = self.profile()?.durations;
        let mut d = DurationTable::from_rate_distance(
            o.ebit_rate_hz.unwrap_or(1.0 / base.t_ebit),
            o.distance_m.unwrap_or(base.t_classical * crate::engine::FIBRE_SPEED_M_PER_S),
        );
        d.t_1q = o.t_1q.unwrap_or(base.t_1q);
        d.t_2q = o.t_2q.unwrap_or(base.t_2q);
        d.t_meas = o.t_meas.unwrap_or(base.t_meas);
        d.validate().map_err(|e| ExperimentError::Invalid(e.to_string()))?;
        Ok(d)
    }

    /// Apply `key=values` where values is a comma list or `lo:hi:n`.
    pub fn set_grid(&mut self, assignment: &str) -> Result<(), ExperimentError> {
        let (key, values) = assignment
            .split_once('=')
            .ok_or_else(|| ExperimentError::Invalid(format!("grid override `{assignment}` is not key=values")))?;
        let key = key.trim();
        if key == "mode" {
            self.grid.mode = match values.trim() {
                "product" => GridMode::Product,
                "each-alone" => GridMode::EachAlone,
                other => return Err(ExperimentError::Invalid(format!("unknown grid mode `{other}`"))),
            };
            return Ok(());
        }
        let v = Some(parse_values(values)?);
        match key {
            "f_w" => self.grid.f_w = v,
            "eps_ebit" => self.grid.eps_ebit = v,
            "eps_cnot" => self.grid.eps_cnot = v,
            "r" => self.grid.r = v,
            "alpha_sq" => self.inputs.alpha_sq = v,
            "phi" => self.inputs.phi = v,
            "gamma" => self.inputs.gamma = v,
            "theta" => self.inputs.theta = v,
            _ => return Err(ExperimentError::Invalid(format!("unknown grid key `{key}`"))),
        }
        Ok(())
    }

    fn sim_config(&self) -> Result<SimConfig, ExperimentError> {
        let mut cfg = SimConfig::ideal().with_schedule(self.schedule_mode);
        cfg.durations = self.durations()?;
        Ok(cfg)
    }
}

/// Inclusive range `lo:hi:n` or comma-separated list; `pi` is accepted as
/// a factor, as in `2pi/5` or `pi`.
pub fn parse_values(text: &str) -> Result<Vec<f64>, ExperimentError> {
    let bad = || ExperimentError::Invalid(format!("cannot parse value list `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo = parse_number(parts[0]).ok_or_else(bad)?;
        let hi = parse_number(parts[1]).ok_or_else(bad)?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return Ok(linspace(lo, hi, n));
    }
    text.split(',').map(|s| parse_number(s).ok_or_else(bad)).collect()
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(pos) = s.find("pi") {
        let (pre, post) = (&s[..pos], &s[pos + 2..]);
        let k = match pre.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            p => p.parse().ok()?,
        };
        let d = match post.strip_prefix('/') {
            Some(d) => d.parse().ok()?,
            None if post.is_empty() => 1.0,
            None => return None,
        };
        return Some(k * PI / d);
    }
    s.parse().ok()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `k` remote CNOTs on four qubits cycling through (0,2), (2,1), (1,3), (3,0).
/// Every gate crosses the partition and the direction alternates.
pub fn remote_chain(k: usize) -> Circuit {
    const PAIRS: [(usize, usize); 4] = [(0, 2), (2, 1), (1, 3), (3, 0)];
    let mut c = Circuit::new(format!("remote-chain-{k}"), 4);
    for j in 0..k {
        let (a, b) = PAIRS[j % 4];
        c.cx(a, b);
    }
    c
}

pub fn remote_cnot() -> Circuit {
    let mut c = Circuit::new("remote-cnot", 2);
    c.cx(0, 1);
    c
}

/// Resolve a built-in template name or read a QASM file (`-` is stdin).
pub fn load_circuit(source: &str, base_dir: Option<&Path>) -> Result<Circuit, ExperimentError> {
    if source == "remote-cnot" {
        return Ok(remote_cnot());
    }
    if let Some(k) = source.strip_prefix("remote-chain:") {
        let k = k.parse().map_err(|_| ExperimentError::Invalid(format!("bad chain length in `{source}`")))?;
        return Ok(remote_chain(k));
    }
    let text = if source == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| ExperimentError::Io { path: "<stdin>".into(), source: e })?;
        s
    } else {
        let path = match base_dir {
            Some(dir) if Path::new(source).is_relative() && !Path::new(source).exists() => dir.join(source),
            _ => PathBuf::from(source),
        };
        std::fs::read_to_string(&path)
            .map_err(|e| ExperimentError::Io { path: path.display().to_string(), source: e })?
    };
    let name = match source {
        "-" => "stdin",
        _ => Path::new(source).file_stem().and_then(|s| s.to_str()).unwrap_or("circuit"),
    };
    parse_qasm_named(&text, name).map_err(|e| ExperimentError::Qasm { path: source.to_string(), source: e })
}

/// Input state: the separable family on wires 0 and 1, |0⟩ elsewhere.
pub fn input_for(n_qubits: usize, p: &InputStateParams) -> Result<PureState, ExperimentError> {
    if n_qubits < 2 {
        return Err(ExperimentError::Invalid("circuits need at least two qubits".into()));
    }
    let two = build_input_state(p).map_err(|e| ExperimentError::Invalid(e.to_string()))?;
    Ok(two.pad_zeros(n_qubits - 2))
}

/// One error setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPoint {
    pub f_w: f64,
    /// As declared when the grid lists `eps_ebit`, else `1 - f_w`.
    pub eps_ebit: f64,
    pub eps_cnot: f64,
    pub r: f64,
}

pub fn error_points(grid: &ErrorGrid, profile: &Profile) -> Result<Vec<ErrorPoint>, ExperimentError> {
    if grid.f_w.is_some() && grid.eps_ebit.is_some() {
        return Err(ExperimentError::Invalid("give either f_w or eps_ebit, not both".into()));
    }
    // (F_w, ε_ebit) pairs, keeping whichever spelling was declared exact.
    let f_w: Option<Vec<(f64, f64)>> = match (&grid.f_w, &grid.eps_ebit) {
        (Some(f), _) => Some(f.iter().map(|&f| (f, 1.0 - f)).collect()),
        (None, Some(e)) => Some(e.iter().map(|&e| (1.0 - e, e)).collect()),
        (None, None) => None,
    };
    for (name, empty) in [
        ("f_w", f_w.as_ref().is_some_and(Vec::is_empty)),
        ("eps_cnot", grid.eps_cnot.as_ref().is_some_and(Vec::is_empty)),
        ("r", grid.r.as_ref().is_some_and(Vec::is_empty)),
    ] {
        if empty {
            return Err(ExperimentError::Invalid(format!("grid `{name}` is empty")));
        }
    }
    let mut out = Vec::new();
    match grid.mode {
        GridMode::Product => {
            let fw = f_w.unwrap_or_else(|| vec![(profile.f_w, 1.0 - profile.f_w)]);
            let ec = grid.eps_cnot.clone().unwrap_or_else(|| vec![profile.eps_cnot]);
            let rr = grid.r.clone().unwrap_or_else(|| vec![profile.r]);
            for &(f_w, eps_ebit) in &fw {
                for &eps_cnot in &ec {
                    for &r in &rr {
                        out.push(ErrorPoint { f_w, eps_ebit, eps_cnot, r });
                    }
                }
            }
        }
        GridMode::EachAlone => {
            let zero = ErrorPoint { f_w: 1.0, eps_ebit: 0.0, eps_cnot: 0.0, r: 0.0 };
            out.extend(f_w.iter().flatten().map(|&(f_w, eps_ebit)| ErrorPoint { f_w, eps_ebit, ..zero }));
            out.extend(grid.eps_cnot.iter().flatten().map(|&eps_cnot| ErrorPoint { eps_cnot, ..zero }));
            out.extend(grid.r.iter().flatten().map(|&r| ErrorPoint { r, ..zero }));
            if out.is_empty() {
                return Err(ExperimentError::Invalid("each-alone grid lists no error values".into()));
            }
        }
    }
    Ok(out)
}

/// Input states paired with the declared `|α|²`.
pub fn input_points(grid: &InputGrid) -> Result<Vec<(f64, InputStateParams)>, ExperimentError> {
    let list = |v: &Option<Vec<f64>>, d: f64, name: &str| -> Result<Vec<f64>, ExperimentError> {
        match v {
            Some(l) if l.is_empty() => Err(ExperimentError::Invalid(format!("input grid `{name}` is empty"))),
            Some(l) => Ok(l.clone()),
            None => Ok(vec![d]),
        }
    };
    let mut out = Vec::new();
    for a2 in list(&grid.alpha_sq, 0.5, "alpha_sq")? {
        if !(0.0..=1.0).contains(&a2) {
            return Err(ExperimentError::Invalid(format!("alpha_sq = {a2} is outside [0, 1]")));
        }
        for phi in list(&grid.phi, 0.0, "phi")? {
            for gamma in list(&grid.gamma, 1.0, "gamma")? {
                for theta in list(&grid.theta, 0.0, "theta")? {
                    out.push((a2, InputStateParams { alpha: C64::new(a2.sqrt(), 0.0), phi, gamma, theta }));
                }
            }
        }
    }
    Ok(out)
}

/// The default input scan: `|α|² ∈ {0, 0.1, …, 1}` and `φ ∈ {0, 2π/5, …, 2π}`.
pub fn default_input_scan() -> InputGrid {
    InputGrid {
        alpha_sq: Some(linspace(0.0, 1.0, 11)),
        phi: Some(linspace(0.0, 2.0 * PI, 6)),
        gamma: None,
        theta: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub f_w: f64,
    pub eps_ebit: f64,
    pub eps_cnot: f64,
    pub r: f64,
    pub alpha_sq: f64,
    pub phi: f64,
    pub gamma: f64,
    pub theta: f64,
    pub f_out: f64,
    pub output_error: f64,
    pub elapsed_s: f64,
    pub n_cnot: usize,
    pub n_ebit: usize,
}

fn na_or_value<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("NA"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scheme: Scheme,
    pub f_w: f64,
    pub eps_ebit: f64,
    pub eps_cnot: f64,
    pub r: f64,
    pub alpha_sq: f64,
    pub phi: f64,
    pub gamma: f64,
    pub theta: f64,
    pub f_sim: f64,
    pub f_linear: f64,
    pub f_exp: f64,
    #[serde(serialize_with = "na_or_value")]
    pub delta_oe_linear: Option<f64>,
    #[serde(serialize_with = "na_or_value")]
    pub delta_oe_exp: Option<f64>,
    pub n_cnot: usize,
    pub n_ebit: usize,
}

impl CompareRow {
    pub fn from_sweep(row: &SweepRow) -> Self {
        let rc = crate::compiler::ResourceCount { n_cnot: row.n_cnot, n_ebit: row.n_ebit, ..Default::default() };
        let f_linear = first_order(ApproxKind::Linear, &rc, row.eps_ebit, row.eps_cnot);
        let f_exp = first_order(ApproxKind::Exponential, &rc, row.eps_ebit, row.eps_cnot);
        CompareRow {
            scheme: row.scheme,
            f_w: row.f_w,
            eps_ebit: row.eps_ebit,
            eps_cnot: row.eps_cnot,
            r: row.r,
            alpha_sq: row.alpha_sq,
            phi: row.phi,
            gamma: row.gamma,
            theta: row.theta,
            f_sim: row.f_out,
            f_linear,
            f_exp,
            delta_oe_linear: delta_oe(f_linear, row.f_out).ok(),
            delta_oe_exp: delta_oe(f_exp, row.f_out).ok(),
            n_cnot: row.n_cnot,
            n_ebit: row.n_ebit,
        }
    }
}

/// Worker count from [`WORKERS_ENV`], or the rayon default.
pub fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count() {
        b = b.num_threads(n);
    }
    match b.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

struct Job<'a> {
    dc: &'a DistributedCircuit,
    err: ErrorPoint,
    alpha_sq: f64,
    input: InputStateParams,
    seed: u64,
}

fn run_job(job: &Job, spec: &ExperimentSpec, base: &SimConfig) -> Result<SweepRow, ExperimentError> {
    let Job { dc, err, alpha_sq, input, seed } = *job;
    let describe = || {
        format!(
            "scheme={} f_w={} eps_cnot={} r={} alpha_sq={} phi={} gamma={} theta={}",
            dc.scheme, err.f_w, err.eps_cnot, err.r, alpha_sq, input.phi, input.gamma, input.theta
        )
    };
    let sim_err = |source| ExperimentError::Sim { point: describe(), source };
    let mut cfg = base.clone().with_werner(err.f_w)?.with_gate_error(err.eps_cnot)?.with_memory_rate(err.r)?;
    if spec.measurement_mode == MeasurementKind::Sampled {
        cfg.measurement_mode = MeasurementMode::Sampled { seed };
    }
    let psi = input_for(dc.n_processing, &input)?;
    let ideal = ideal_output_dc(dc, &psi).map_err(sim_err)?;
    let res = simulate(dc, &psi, &cfg).map_err(sim_err)?;
    let f_out = fidelity_pure(&ideal, &res.rho_out).map_err(|e| sim_err(e.into()))?.clamp(0.0, 1.0);
    Ok(SweepRow {
        scheme: dc.scheme,
        f_w: err.f_w,
        eps_ebit: err.eps_ebit,
        eps_cnot: err.eps_cnot,
        r: err.r,
        alpha_sq,
        phi: input.phi,
        gamma: input.gamma,
        theta: input.theta,
        f_out,
        output_error: 1.0 - f_out,
        elapsed_s: res.elapsed,
        n_cnot: res.resources.n_cnot,
        n_ebit: res.resources.n_ebit,
    })
}

/// Compile the circuit once per listed scheme.
pub fn compile_all(spec: &ExperimentSpec) -> Result<Vec<DistributedCircuit>, ExperimentError> {
    let circuit = load_circuit(&spec.circuit, spec.base_dir.as_deref())?;
    spec.schemes()?
        .into_iter()
        .map(|s| compile(&circuit, s).map_err(|source| ExperimentError::Compile { scheme: s, source }))
        .collect()
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    let profile = spec.profile()?;
    let errs = error_points(&spec.grid, &profile)?;
    let inputs = input_points(&spec.inputs)?;
    let dcs = compile_all(spec)?;
    let base = spec.sim_config()?;
    let mut jobs = Vec::with_capacity(dcs.len() * errs.len() * inputs.len());
    for dc in &dcs {
        for &err in &errs {
            for &(alpha_sq, input) in &inputs {
                let seed = spec.seed.wrapping_add(jobs.len() as u64);
                jobs.push(Job { dc, err, alpha_sq, input, seed });
            }
        }
    }
    in_pool(|| jobs.par_iter().map(|j| run_job(j, spec, &base)).collect())
}

pub fn run_compare(spec: &ExperimentSpec) -> Result<Vec<CompareRow>, ExperimentError> {
    Ok(run_sweep(spec)?.iter().map(CompareRow::from_sweep).collect())
}

/// Sweep with [`default_input_scan`] for any input list the experiment leaves unset.
pub fn run_input_scan(spec: &ExperimentSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut s = spec.clone();
    let d = default_input_scan();
    s.inputs.alpha_sq = s.inputs.alpha_sq.or(d.alpha_sq);
    s.inputs.phi = s.inputs.phi.or(d.phi);
    run_sweep(&s)
}

/// CSV with a version comment line followed by a header row.
pub fn write_csv<T: Serialize, W: Write>(version: &str, rows: &[T], mut out: W) -> Result<(), ExperimentError> {
    writeln!(out, "{version}").map_err(|e| ExperimentError::Io { path: "<output>".into(), source: e })?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| ExperimentError::Io { path: "<output>".into(), source: e })?;
    Ok(())
}

pub fn csv_string<T: Serialize>(version: &str, rows: &[T]) -> Result<String, ExperimentError> {
    let mut buf = Vec::new();
    write_csv(version, rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Write `text` to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), ExperimentError> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).map_err(|source| ExperimentError::Io { path: p.display().to_string(), source })
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| ExperimentError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// JSON compilation report for `source` under `scheme`.
pub fn compile_report(source: &str, scheme: Scheme) -> Result<CompileReport, ExperimentError> {
    let c = load_circuit(source, None)?;
    let dc = compile(&c, scheme).map_err(|e| ExperimentError::Compile { scheme, source: e })?;
    Ok(CompileReport::new(&dc))
}
