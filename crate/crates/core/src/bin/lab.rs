use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_lab::experiments::{
    apply_overrides, builtin_names, builtin_scenario, collect_reports, load_suite, parse_suite, run_suite, Suite,
    SuiteSummary, ACCEPTANCE_SUITE,
};

#[derive(Parser)]
#[command(name = "lab", version, about = "Solitary-wave experiments on Toda and FPU lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario or suite file (`acceptance` runs the bundled suite).
    Run {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run scenarios one after another.
        #[arg(long)]
        serial: bool,
    },
    /// Run a built-in scenario with `key=value` overrides.
    Scenario {
        name: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// List the built-in scenarios.
        #[arg(long)]
        list: bool,
    },
    /// Summarize the reports written below a run directory.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> lattice_lab::Result<u8> {
    let summary = match cli.command {
        Command::Run { config, out, serial } => {
            let mut suite = if config == "acceptance" {
                parse_suite(ACCEPTANCE_SUITE)?
            } else {
                load_suite(&PathBuf::from(&config))?
            };
            suite.parallel &= !serial;
            log::info!("running {} scenario(s) from {config}", suite.scenarios.len());
            run_suite(&suite, out.as_deref())?
        }
        Command::Scenario { list: true, .. } => {
            for n in builtin_names() {
                println!("{n}");
            }
            return Ok(0);
        }
        Command::Scenario { name, sets, out, .. } => {
            let name = name.unwrap_or_else(|| "unperturbed".into());
            let s = apply_overrides(&builtin_scenario(&name)?, &sets)?;
            run_suite(&Suite { scenarios: vec![s], ..Suite::default() }, out.as_deref())?
        }
        Command::Report { dir } => collect_reports(&dir)?,
    };
    print_summary(&summary);
    Ok(summary.exit_code() as u8)
}

fn print_summary(summary: &SuiteSummary) {
    for r in &summary.reports {
        let c = r.c_plus.map_or("-".into(), |c| format!("{c:.9}"));
        println!("# {} ({:.1} s, c+ = {c})", r.scenario.name, r.runtime_seconds);
    }
    for line in summary.lines() {
        println!("{line}");
    }
    let bad = summary.lines().iter().filter(|l| l.starts_with("FAIL") || l.starts_with("XPASS")).count();
    println!("{} line(s), {bad} unexpected", summary.lines().len());
}
