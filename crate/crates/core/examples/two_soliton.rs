//! A fast soliton overtakes a slow one; the tracked speed of the fast wave
//! is the same before and after.

use lattice_lab::experiments::{builtin_scenario, run_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile_dir()?;
    let scenario = builtin_scenario("two-soliton")?;
    let report = run_scenario(&scenario, Some(&dir));
    if let Some(f) = &report.failure {
        return Err(format!("{}: {}", f.stage, f.cause).into());
    }
    let csv = std::fs::read_to_string(dir.join("two-soliton/track.csv"))?;
    println!("{:>6} {:>14} {:>10}", "t", "c", "x");
    for line in csv.lines().skip(1).step_by(100) {
        let f: Vec<&str> = line.split(',').collect();
        println!("{:>6} {:>14} {:>10}", f[0], f[1], f[3]);
    }
    for c in &report.checks {
        println!("{}: {:.3e} (tolerance {:.0e}) {:?}", c.name, c.value, c.tolerance, c.fitted_constants);
    }
    println!("constraint solves skipped during the interaction: {}", report.metric("tracking_gaps").unwrap_or(0.0));
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let d = std::env::temp_dir().join(format!("two-soliton-{}", std::process::id()));
    std::fs::create_dir_all(&d)?;
    Ok(d)
}
