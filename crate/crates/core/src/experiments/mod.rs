//! Scenario orchestration: configuration, runs, cross-run comparisons and
//! persisted reports.

mod builtin;
mod run;
mod scenario;
mod suite;

pub use builtin::{builtin_names, builtin_scenario, ACCEPTANCE_SUITE};
pub use run::{run_scenario, RunFailure, RunMeta, RunReport};
pub use scenario::{
    build_family, build_perturbation, project_out, CheckKind, CheckSpec, DynamicsKind, NeutralMode, Perturbation,
    Scenario, SolitonSpec, VirialParams, WeightParams,
};
pub use suite::{
    apply_overrides, collect_reports, compare, load_suite, parse_suite, run_suite, Comparison, ComparisonKind, Suite,
    SuiteSummary,
};
