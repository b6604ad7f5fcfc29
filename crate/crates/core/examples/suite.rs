//! A small suite defined inline: two amplitudes of the same bump, compared.

use lattice_lab::experiments::{parse_suite, run_suite};

const SUITE: &str = r#"
parallel = true

[[scenario]]
base = "theorem1-small-bump"
name = "eps-1e-2"
set = ["integrator.t_end=60.0", "tail_times=[]", 'checks=[{kind="constraint_residual", tolerance=1e-9}]']

[[scenario]]
base = "theorem1-small-bump"
name = "eps-2e-3"
set = ["integrator.t_end=60.0", "tail_times=[]", "perturbation.amplitude=2e-3", 'checks=[{kind="constraint_residual", tolerance=1e-9}]']

[[comparison]]
name = "cdot_slope"
kind = "loglog_slope"
metric = "sup_cdot"
x_metric = "eps"
runs = ["eps-2e-3", "eps-1e-2"]
target = 2.0
tolerance = 0.15
"#;

fn main() -> lattice_lab::Result<()> {
    let summary = run_suite(&parse_suite(SUITE)?, None)?;
    for line in summary.lines() {
        println!("{line}");
    }
    std::process::exit(summary.exit_code());
}
