use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Nearest-neighbour interaction potential `V(r)`.
///
/// Both families satisfy `V(0) = V'(0) = 0`. The FPU family is the quartic
/// polynomial `k2 r²/2 + k3 r³ + k4 r⁴` and must have `k2 > 0`, `k3 ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `V(r) = e^{-r} - 1 + r`.
    Toda,
    Fpu { k2: f64, k3: f64, k4: f64 },
}

impl Potential {
    pub fn fpu(k2: f64, k3: f64, k4: f64) -> Result<Self> {
        let v = Potential::Fpu { k2, k3, k4 };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Toda => Ok(()),
            Potential::Fpu { k2, k3, k4 } => {
                if !(k2.is_finite() && k3.is_finite() && k4.is_finite()) {
                    return Err(LabError::InvalidPotential("non-finite coefficient".into()));
                }
                if k2 <= 0.0 {
                    return Err(LabError::InvalidPotential(format!("k2 = {k2} must be positive")));
                }
                if k3 == 0.0 {
                    return Err(LabError::InvalidPotential("k3 must be nonzero".into()));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            // exp_m1 keeps V accurate for tiny |r|
            Potential::Toda => (-r).exp_m1() + r,
            Potential::Fpu { k2, k3, k4 } => r * r * (0.5 * k2 + r * (k3 + r * k4)),
        }
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        match *self {
            Potential::Toda => -(-r).exp_m1(),
            Potential::Fpu { k2, k3, k4 } => r * (k2 + r * (3.0 * k3 + 4.0 * k4 * r)),
        }
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        match *self {
            Potential::Toda => (-r).exp(),
            Potential::Fpu { k2, k3, k4 } => k2 + r * (6.0 * k3 + 12.0 * k4 * r),
        }
    }

    #[inline]
    pub fn d3(&self, r: f64) -> f64 {
        match *self {
            Potential::Toda => -(-r).exp(),
            Potential::Fpu { k3, k4, .. } => 6.0 * k3 + 24.0 * k4 * r,
        }
    }

    /// `√V''(0)`: the largest linear group speed.
    pub fn sound_speed(&self) -> f64 {
        self.d2(0.0).sqrt()
    }

    pub fn is_toda(&self) -> bool {
        matches!(self, Potential::Toda)
    }
}
