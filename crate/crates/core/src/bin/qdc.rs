use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qdc_sim::compiler::Scheme;
use qdc_sim::engine::ScheduleMode;
use qdc_sim::experiment::{
    compile_report, csv_string, emit, run_compare, run_input_scan, run_sweep, ExperimentError, ExperimentSpec,
    MeasurementKind, COMPARE_CSV_VERSION, SWEEP_CSV_VERSION, WORKERS_ENV,
};

#[derive(Parser)]
#[command(name = "qdc", version, about = "Distributed quantum circuit compiler and noisy simulator")]
#[command(after_help = "Set QDC_WORKERS to choose the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a QASM file and print a JSON report.
    Compile {
        /// QASM file, a built-in template name, or `-` for stdin.
        circuit: String,
        #[arg(long, default_value = "cat-comm")]
        scheme: Scheme,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate every scheme over an error grid and write CSV rows.
    Sweep(RunArgs),
    /// Sweep, then add first-order estimates and their relative difference.
    Compare(RunArgs),
    /// Sweep over the input-state family (|alpha|^2 and phi by default).
    InputScan(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Sequential,
    Layered,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasurementArg {
    Mixture,
    Sampled,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its fields.
    spec: Option<PathBuf>,
    /// Built-in template (`remote-cnot`, `remote-chain:K`) or QASM path.
    #[arg(long)]
    circuit: Option<String>,
    /// Scheme to run; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    /// Parameter profile: table1-soa, distilled or noiseless.
    #[arg(long)]
    profile: Option<String>,
    /// Grid override `key=v1,v2` or `key=lo:hi:n`; repeatable.
    #[arg(long)]
    grid: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    schedule_mode: Option<ScheduleArg>,
    #[arg(long, value_enum)]
    measurement_mode: Option<MeasurementArg>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec, ExperimentError> {
        let mut spec = match &self.spec {
            Some(p) => ExperimentSpec::load(p)?,
            None => ExperimentSpec::default(),
        };
        if let Some(c) = &self.circuit {
            spec.circuit = c.clone();
        }
        if !self.scheme.is_empty() {
            spec.schemes = self.scheme.iter().map(|s| s.to_string()).collect();
        }
        if let Some(p) = &self.profile {
            spec.profile = p.clone();
        }
        for g in &self.grid {
            spec.set_grid(g)?;
        }
        if let Some(o) = &self.out {
            spec.output = Some(o.clone());
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(m) = self.schedule_mode {
            spec.schedule_mode = match m {
                ScheduleArg::Sequential => ScheduleMode::Sequential,
                ScheduleArg::Layered => ScheduleMode::Layered,
            };
        }
        if let Some(m) = self.measurement_mode {
            spec.measurement_mode = match m {
                MeasurementArg::Mixture => MeasurementKind::Mixture,
                MeasurementArg::Sampled => MeasurementKind::Sampled,
            };
        }
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Compile { circuit, scheme, out } => {
            let report = compile_report(&circuit, scheme)?;
            emit(&(report.to_json() + "\n"), out.as_deref())
        }
        Command::Sweep(args) => {
            let spec = args.spec()?;
            let text = csv_string(SWEEP_CSV_VERSION, &run_sweep(&spec)?)?;
            emit(&text, spec.output.as_deref())
        }
        Command::Compare(args) => {
            let spec = args.spec()?;
            let text = csv_string(COMPARE_CSV_VERSION, &run_compare(&spec)?)?;
            emit(&text, spec.output.as_deref())
        }
        Command::InputScan(args) => {
            let spec = args.spec()?;
            let text = csv_string(SWEEP_CSV_VERSION, &run_input_scan(&spec)?)?;
            emit(&text, spec.output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        if v.trim().parse::<usize>().map_or(true, |n| n == 0) {
            eprintln!("qdc: ignoring {WORKERS_ENV}={v}: expected a positive integer");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdc: {e}");
            ExitCode::FAILURE
        }
    }
}
