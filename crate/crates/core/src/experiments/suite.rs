use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_scenario, RunReport};
use super::builtin::builtin_scenario;
use super::scenario::Scenario;
use crate::diagnostics::Check;
use crate::error::{LabError, Result};

/// A comparison across runs of the same suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    #[serde(flatten)]
    pub kind: ComparisonKind,
    pub tolerance: f64,
    #[serde(default)]
    pub expected_fail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonKind {
    /// `max/min` of `metric` over `runs` is at most `tolerance`.
    RatioWithin { metric: String, runs: Vec<String> },
    /// Least-squares slope of `log metric` against `log x_metric` is
    /// `target ± tolerance`.
    LoglogSlope { metric: String, x_metric: String, runs: Vec<String>, target: f64 },
    /// `|m(b) − m(a)| / |m(a)|` is at most `tolerance`, with `runs = [a, b]`.
    RelativeChange { metric: String, runs: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Suite {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub parallel: bool,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<Scenario>,
    #[serde(default, rename = "comparison")]
    pub comparisons: Vec<Comparison>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub reports: Vec<RunReport>,
    pub comparisons: Vec<Check>,
}

impl SuiteSummary {
    pub fn ok(&self) -> bool {
        self.reports.iter().all(RunReport::ok) && self.comparisons.iter().all(Check::ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.ok() {
            0
        } else {
            1
        }
    }

    pub fn report(&self, name: &str) -> Option<&RunReport> {
        self.reports.iter().find(|r| r.scenario.name == name)
    }

    /// One line per check: `PASS|FAIL|XFAIL|XPASS scenario/check value (tol)`.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.reports {
            if let Some(f) = &r.failure {
                out.push(format!("FAIL  {}: aborted in {} ({})", r.scenario.name, f.stage, f.cause));
            }
            for c in &r.checks {
                out.push(format!("{} {}/{}", status(c), r.scenario.name, describe(c)));
            }
        }
        for c in &self.comparisons {
            out.push(format!("{} {}", status(c), describe(c)));
        }
        out
    }
}

fn status(c: &Check) -> &'static str {
    match (c.pass, c.expected_fail) {
        (true, false) => "PASS ",
        (false, false) => "FAIL ",
        (false, true) => "XFAIL",
        (true, true) => "XPASS",
    }
}

fn describe(c: &Check) -> String {
    let mut s = format!("{}: {:.4e} (tolerance {:.3e})", c.name, c.value, c.tolerance);
    if !c.note.is_empty() {
        s.push_str(&format!(" [{}]", c.note));
    }
    s
}

/// Parses a suite file. A file without `[[scenario]]` tables is read as a
/// single scenario.
///
/// A `[[scenario]]` entry may name a built-in scenario instead of spelling
/// one out: `base = "<builtin>"`, an optional new `name`, and `set`, a list of
/// `key=value` overrides (see [`apply_overrides`]).
pub fn parse_suite(text: &str) -> Result<Suite> {
    let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
    if value.contains_key("scenario") || value.contains_key("comparison") || value.is_empty() {
        if let Some(toml::Value::Array(entries)) = value.get_mut("scenario") {
            for entry in entries.iter_mut() {
                if let Some(t) = entry.as_table().filter(|t| t.contains_key("base")) {
                    *entry = expand_entry(t)?;
                }
            }
        }
        toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))
    } else {
        let s: Scenario = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        Ok(Suite { scenarios: vec![s], ..Suite::default() })
    }
}

fn expand_entry(t: &toml::Table) -> Result<toml::Value> {
    let base = t["base"].as_str().ok_or_else(|| LabError::Config("`base` must be a scenario name".into()))?;
    let mut sets: Vec<String> = match t.get("set") {
        None => Vec::new(),
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| LabError::Config(format!("{base}: `set` entries must be strings")))?,
        Some(_) => return Err(LabError::Config(format!("{base}: `set` must be a list of strings"))),
    };
    if let Some(name) = t.get("name") {
        sets.push(format!("name={name}"));
    }
    if let Some(k) = t.keys().find(|k| !matches!(k.as_str(), "base" | "set" | "name")) {
        return Err(LabError::Config(format!("{base}: unexpected key `{k}` next to `base`")));
    }
    let s = apply_overrides(&builtin_scenario(base)?, &sets)?;
    toml::Value::try_from(&s).map_err(|e| LabError::Config(e.to_string()))
}

pub fn load_suite(path: &Path) -> Result<Suite> {
    let text = fs::read_to_string(path)?;
    parse_suite(&text).map_err(|e| match e {
        LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Applies `key=value` overrides (dotted keys, TOML literal values; bare
/// words are taken as strings) to a scenario.
pub fn apply_overrides(s: &Scenario, sets: &[String]) -> Result<Scenario> {
    let mut v = toml::Value::try_from(s).map_err(|e| LabError::Config(e.to_string()))?;
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("override `{set}` is not key=value")))?;
        let parsed: toml::Value = match format!("x = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("x").expect("key present"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let mut cur = &mut v;
        let parts: Vec<&str> = key.trim().split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = cur
                .as_table_mut()
                .ok_or_else(|| LabError::Config(format!("override `{key}`: `{part}` is not inside a table")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), parsed.clone());
                break;
            }
            cur = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
    }
    v.try_into().map_err(|e: toml::de::Error| LabError::Config(format!("after overrides: {e}")))
}

/// Evaluates cross-run comparisons against finished reports.
pub fn compare(reports: &[RunReport], comparisons: &[Comparison]) -> Vec<Check> {
    comparisons
        .iter()
        .map(|cmp| {
            let get = |run: &str, metric: &str| -> std::result::Result<f64, String> {
                reports
                    .iter()
                    .find(|r| r.scenario.name == run)
                    .ok_or_else(|| format!("no run named {run}"))?
                    .metric(metric)
                    .ok_or_else(|| format!("run {run} has no metric {metric}"))
            };
            let outcome: std::result::Result<Check, String> = (|| match &cmp.kind {
                ComparisonKind::RatioWithin { metric, runs } => {
                    let vals: Vec<f64> = runs.iter().map(|r| get(r, metric)).collect::<std::result::Result<_, _>>()?;
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let mut c = Check::at_most(&cmp.name, hi / lo, cmp.tolerance);
                    for (r, v) in runs.iter().zip(&vals) {
                        c = c.with_constant(r, *v);
                    }
                    Ok(c)
                }
                ComparisonKind::LoglogSlope { metric, x_metric, runs, target } => {
                    let mut pts = Vec::new();
                    for r in runs {
                        pts.push((get(r, x_metric)?.ln(), get(r, metric)?.ln()));
                    }
                    let n = pts.len() as f64;
                    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
                    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
                    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
                    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
                    let slope = sxy / sxx;
                    Ok(Check::new(&cmp.name, (slope - target).abs() <= cmp.tolerance, slope, cmp.tolerance)
                        .with_constant("target", *target))
                }
                ComparisonKind::RelativeChange { metric, runs } => {
                    if runs.len() != 2 {
                        return Err("relative_change needs exactly two runs".into());
                    }
                    let a = get(&runs[0], metric)?;
                    let b = get(&runs[1], metric)?;
                    Ok(Check::at_most(&cmp.name, (b - a).abs() / a.abs(), cmp.tolerance)
                        .with_constant(&runs[0], a)
                        .with_constant(&runs[1], b))
                }
            })();
            let c = outcome.unwrap_or_else(|e| Check::new(&cmp.name, false, f64::NAN, cmp.tolerance).with_note(e));
            if cmp.expected_fail {
                c.expect_fail()
            } else {
                c
            }
        })
        .collect()
}

/// Runs every scenario of the suite (in parallel unless disabled), then the
/// comparisons. Writes `summary.json` when an output directory is set.
pub fn run_suite(suite: &Suite, out_dir: Option<&Path>) -> Result<SuiteSummary> {
    let out = out_dir.map(Path::to_path_buf).or_else(|| suite.out_dir.clone());
    let out_ref = out.as_deref();
    let reports: Vec<RunReport> = if suite.parallel {
        suite.scenarios.par_iter().map(|s| run_scenario(s, out_ref)).collect()
    } else {
        suite.scenarios.iter().map(|s| run_scenario(s, out_ref)).collect()
    };
    let comparisons = compare(&reports, &suite.comparisons);
    let summary = SuiteSummary { reports, comparisons };
    if let Some(dir) = out_ref {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(summary)
}

/// Reads every `report.json` below `dir` (and `summary.json` comparisons, if present).
pub fn collect_reports(dir: &Path) -> Result<SuiteSummary> {
    let summary_path = dir.join("summary.json");
    if summary_path.exists() {
        return Ok(serde_json::from_str(&fs::read_to_string(summary_path)?)?);
    }
    let mut reports = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "report.json") {
                reports.push(serde_json::from_str(&fs::read_to_string(&p)?)?);
            }
        }
    }
    reports.sort_by(|a: &RunReport, b| a.scenario.name.cmp(&b.scenario.name));
    Ok(SuiteSummary { reports, comparisons: Vec::new() })
}
