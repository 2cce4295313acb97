//! Parse OpenQASM 2.0, lower it to U3 + CNOT, partition it over two QPUs and
//! print the JSON compilation report. Pass a path to compile a file instead
//! of the embedded circuit.
//!
//! cargo run --example compile_qasm -- [path.qasm] [scheme]

use qdc_sim::compiler::{compile, detect_remote, partition, CompileReport, Scheme};
use qdc_sim::qasm::{lower_to_basis, parse_qasm_named};

const GHZ: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[4];
creg c[4];
h q[0];
cx q[0], q[1];
cx q[1], q[2];
cp(pi/4) q[2], q[3];
measure q -> c;
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (name, text) = match args.next() {
        Some(p) => (p.clone(), std::fs::read_to_string(&p)?),
        None => ("ghz-cp".to_string(), GHZ.to_string()),
    };
    let scheme: Scheme = args.next().as_deref().unwrap_or("cat-comm").parse()?;

    let circuit = parse_qasm_named(&text, &name)?;
    let lowered = lower_to_basis(&circuit);
    let p = partition(circuit.n_qubits)?;
    println!("{} qubits, {} ops, {} after lowering", circuit.n_qubits, circuit.ops.len(), lowered.ops.len());
    println!("remote gate indices in the lowered circuit: {:?}", detect_remote(&lowered, &p));

    let dc = compile(&circuit, scheme)?;
    println!("{}", CompileReport::new(&dc).to_json());
    Ok(())
}
