//! Solitary waves of the lattice: the analytic Toda family and numerically
//! computed FPU waves, with tangent fields and energy slopes.

mod export;
mod fpu;
mod toda;

pub use export::{write_profile_csv, ProfileMeta};
pub use fpu::{
    default_period, fpu_sound_speed, fpu_tangents, solve_fpu_profile, solve_fpu_profile_with,
    FpuFamily, FpuSoliton, FpuSolverOptions,
};
pub use toda::{
    kappa_derivatives, sample_toda, solve_kappa, toda_jet, toda_profile, toda_tangents, TodaFamily,
    TodaSoliton, TODA_EDGE_MARGIN,
};

use crate::error::Result;
use crate::lattice::{LatticeField, LatticeGrid, Potential};

/// Derivatives of a sampled wave `ũ_c(n − x)`.
///
/// `dy` etc. are derivatives of the profile with respect to its argument
/// `y = n − x`, so `∂ₓ = −∂_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveJet {
    pub u: LatticeField,
    pub dy: LatticeField,
    pub dyy: LatticeField,
    pub dc: LatticeField,
    pub dcy: LatticeField,
    pub dcc: LatticeField,
}

impl WaveJet {
    pub fn zeros(grid: LatticeGrid) -> Self {
        let z = LatticeField::zeros(grid);
        Self { u: z.clone(), dy: z.clone(), dyy: z.clone(), dc: z.clone(), dcy: z.clone(), dcc: z }
    }

    /// `u̇_c = −c ∂_y ũ`.
    pub fn ud(&self, c: f64) -> LatticeField {
        self.dy.scaled(-c)
    }

    /// `ü_c = c² ∂_y² ũ`.
    pub fn udd(&self, c: f64) -> LatticeField {
        self.dyy.scaled(c * c)
    }

    /// `∂_c u̇_c = −∂_y ũ − c ∂_c∂_y ũ`.
    pub fn dc_ud(&self, c: f64) -> LatticeField {
        let mut out = self.dy.scaled(-1.0);
        out.axpy(-c, &self.dcy);
        out
    }
}

/// Neutral-mode fields of a sampled wave and the energy slope `dH(u_c)/dc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonTangents {
    pub ud: LatticeField,
    pub uc: LatticeField,
    pub dhdc: f64,
    pub theta: f64,
}

/// `dH(ũ_c)/dc = Σ (p̃ ∂_c p̃ + V'(r̃) ∂_c r̃)`.
pub fn energy_slope(jet: &WaveJet, v: &Potential) -> f64 {
    jet.u
        .r()
        .iter()
        .zip(jet.u.p())
        .zip(jet.dc.r().iter().zip(jet.dc.p()))
        .map(|((&r, &p), (&rc, &pc))| p * pc + v.d1(r) * rc)
        .sum()
}

/// Builds tangents from a jet, with `dH/dc` from [`energy_slope`].
pub fn tangents_from_jet(jet: &WaveJet, c: f64, v: &Potential) -> SolitonTangents {
    let dhdc = energy_slope(jet, v);
    SolitonTangents { ud: jet.ud(c), uc: jet.dc.clone(), dhdc, theta: 1.0 / dhdc }
}

/// A smooth one-parameter family of solitary waves `c ↦ ũ_c`.
pub trait WaveFamily: Send + Sync {
    fn potential(&self) -> Potential;

    fn sound_speed(&self) -> f64;

    /// Spatial decay exponent of the profile tails (`κ(c)` for Toda).
    fn decay_rate(&self, c: f64) -> Result<f64>;

    fn sample(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<LatticeField>;

    fn jet(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<WaveJet>;

    fn tangents(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<SolitonTangents> {
        Ok(tangents_from_jet(&self.jet(c, x, grid)?, c, &self.potential()))
    }
}
