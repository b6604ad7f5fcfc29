//! Runs a built-in scenario, optionally with overrides, and prints its checks.
//!
//! `cargo run --release --example run_scenario -- theorem1-small-bump perturbation.amplitude=1e-3`
//!
//! `--out <dir>` keeps the CSV artifacts.

use lattice_lab::experiments::{apply_overrides, builtin_scenario, run_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "unperturbed".into());
    let mut sets = Vec::new();
    let mut out = None;
    while let Some(a) = args.next() {
        if a == "--out" {
            out = args.next().map(std::path::PathBuf::from);
        } else {
            sets.push(a);
        }
    }
    let scenario = apply_overrides(&builtin_scenario(&name)?, &sets)?;
    let report = run_scenario(&scenario, out.as_deref());
    println!("{} ({:.1} s)", scenario.name, report.runtime_seconds);
    if let Some(f) = &report.failure {
        println!("  aborted in {}: {}", f.stage, f.cause);
    }
    for c in &report.checks {
        let mark = if c.ok() { "ok  " } else { "FAIL" };
        println!("  {mark} {:<24} {:>12.4e}  tol {:.2e}  {:?} {}", c.name, c.value, c.tolerance, c.fitted_constants, c.note);
    }
    for (k, v) in &report.metrics {
        println!("  {k:<28} {v:.6e}");
    }
    Ok(())
}
