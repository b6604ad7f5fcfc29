use serde::{Deserialize, Serialize};

use super::LatticeField;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `(Σ e^{2an} |u(n)|²)^{1/2}`
    L2a,
    /// `(Σ e^{-κ|n-x|} |u(n)|²)^{1/2}`, two-sided weight around the wave center
    W,
    /// `e^{-ax} ‖u‖_{l²_a}`, one-sided weight in the wave frame
    X,
}

/// Center trajectory of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CenterPath {
    /// `x(t) = x0 + speed t`
    Line { x0: f64, speed: f64 },
}

impl CenterPath {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            CenterPath::Line { x0, speed } => x0 + speed * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub a: f64,
    pub center: CenterPath,
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl WeightSpec {
    pub fn new(a: f64, center: CenterPath, kappa: Option<f64>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::InvalidArgument(format!("weight exponent a = {a} must be positive")));
        }
        if let Some(k) = kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(LabError::InvalidArgument(format!("kappa = {k} must be positive")));
            }
        }
        Ok(Self { a, center, kappa })
    }
}

/// Evaluates one of the weighted norms at time `t`.
pub fn weighted_norm(u: &LatticeField, spec: &WeightSpec, kind: NormKind, t: f64) -> Result<f64> {
    weighted_norm_centered(u, spec.a, kind, spec.center.at(t), spec.kappa)
}

/// Same as [`weighted_norm`] with the center supplied directly.
///
/// Exponents are shifted by their maximum over the support of `u` before
/// exponentiation, so `e^{2an}` never overflows on its own.
pub fn weighted_norm_centered(
    u: &LatticeField,
    a: f64,
    kind: NormKind,
    center: f64,
    kappa: Option<f64>,
) -> Result<f64> {
    let grid = u.grid();
    let mag2 = |i: usize| u.r()[i] * u.r()[i] + u.p()[i] * u.p()[i];
    // log-weight at slot i
    let log_w: Box<dyn Fn(usize) -> f64> = match kind {
        NormKind::L2a => Box::new(move |i| 2.0 * a * grid.site(i) as f64),
        NormKind::X => Box::new(move |i| 2.0 * a * (grid.site(i) as f64 - center)),
        NormKind::W => {
            let k = kappa.ok_or_else(|| {
                LabError::InvalidArgument("W-norm needs kappa in the weight spec".into())
            })?;
            Box::new(move |i| -k * (grid.site(i) as f64 - center).abs())
        }
    };
    let shift = (0..grid.len())
        .filter(|&i| mag2(i) > 0.0)
        .map(&log_w)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let s: f64 = (0..grid.len())
        .map(|i| {
            let m = mag2(i);
            if m > 0.0 {
                (log_w(i) - shift).exp() * m
            } else {
                0.0
            }
        })
        .sum();
    let value = s.sqrt() * (0.5 * shift).exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(LabError::NormOverflow)
    }
}
