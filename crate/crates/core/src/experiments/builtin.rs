use super::scenario::Scenario;
use super::suite::parse_suite;
use crate::error::{LabError, Result};

const BUILTIN: &[(&str, &str)] = &[
    ("unperturbed", include_str!("../../configs/scenarios/unperturbed.toml")),
    ("theorem1-small-bump", include_str!("../../configs/scenarios/theorem1-small-bump.toml")),
    ("two-soliton", include_str!("../../configs/scenarios/two-soliton.toml")),
    ("fpu-small-bump", include_str!("../../configs/scenarios/fpu-small-bump.toml")),
    ("virial-small", include_str!("../../configs/scenarios/virial-small.toml")),
    ("virial-fast-soliton", include_str!("../../configs/scenarios/virial-fast-soliton.toml")),
    ("linearized-decay", include_str!("../../configs/scenarios/linearized-decay.toml")),
    ("linearized-neutral", include_str!("../../configs/scenarios/linearized-neutral.toml")),
];

/// The acceptance suite shipped with the crate.
pub const ACCEPTANCE_SUITE: &str = include_str!("../../configs/acceptance.toml");

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|b| b.0).collect()
}

pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let (_, text) = BUILTIN.iter().find(|b| b.0 == name).ok_or_else(|| {
        LabError::Config(format!("unknown scenario `{name}`; available: {}", builtin_names().join(", ")))
    })?;
    let mut suite = parse_suite(text)?;
    Ok(suite.scenarios.remove(0))
}
