use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// JSON sidecar written next to a profile table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_s: Option<f64>,
    pub residual: f64,
    #[serde(rename = "L")]
    pub period: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

/// Writes `x,r,p` rows.
pub fn write_profile_csv<W: Write>(x: &[f64], r: &[f64], p: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "x,r,p")?;
    for ((x, r), p) in x.iter().zip(r).zip(p) {
        writeln!(out, "{x},{r},{p}")?;
    }
    Ok(())
}
