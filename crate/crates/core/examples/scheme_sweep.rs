//! Drive a small product-grid sweep from an inline TOML experiment and print
//! the CSV. Set QDC_WORKERS to control the thread pool.
//!
//! cargo run --example scheme_sweep

use qdc_sim::experiment::{csv_string, run_sweep, ExperimentSpec, SWEEP_CSV_VERSION};

const SPEC: &str = r#"
name = "schemes-vs-ebit-error"
circuit = "remote-cnot"
schemes = ["cat-comm", "1tp", "2tp", "tp-safe"]
profile = "table1-soa"

[grid]
eps_ebit = [0.01, 0.04, 0.07, 0.10]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::from_toml(SPEC)?;
    let rows = run_sweep(&spec)?;
    print!("{}", csv_string(SWEEP_CSV_VERSION, &rows)?);

    let worst = rows.iter().max_by(|a, b| a.output_error.total_cmp(&b.output_error)).expect("non-empty grid");
    eprintln!("largest output error: {} at eps_ebit = {} ({:.4})", worst.scheme, worst.eps_ebit, worst.output_error);
    Ok(())
}
