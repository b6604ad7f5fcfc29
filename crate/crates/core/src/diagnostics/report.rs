use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// One named check with its declared tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub fitted_constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    /// Failure is the expected outcome.
    #[serde(default)]
    pub expected_fail: bool,
    #[serde(default)]
    pub note: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            tolerance,
            fitted_constants: BTreeMap::new(),
            window: None,
            expected_fail: false,
            note: String::new(),
        }
    }

    /// `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value <= tolerance, value, tolerance)
    }

    /// `value ≥ tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value >= tolerance, value, tolerance)
    }

    pub fn with_constant(mut self, key: &str, value: f64) -> Self {
        self.fitted_constants.insert(key.to_string(), value);
        self
    }

    pub fn with_window(mut self, window: (f64, f64)) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn expect_fail(mut self) -> Self {
        self.expected_fail = true;
        self
    }

    /// Passing, or failing as expected.
    pub fn ok(&self) -> bool {
        self.pass != self.expected_fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub scenario_id: String,
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }
}

/// Writes named columns of equal length as CSV.
pub fn write_series_csv<W: Write>(mut out: W, columns: &[(&str, &[f64])]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.1.len());
    if columns.iter().any(|c| c.1.len() != n) {
        return Err(LabError::InvalidArgument("series columns differ in length".into()));
    }
    let header: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| format!("{:e}", c.1[i])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
