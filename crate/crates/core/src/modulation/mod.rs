//! Decomposition `u = u_{c}(γ) + v₁ + v₂` around a moving solitary wave.
//!
//! The speed `c` and phase `γ` (with center `x = cγ`) are fixed by the two
//! orthogonality constraints
//!
//! ```text
//! ⟨u − u_c(γ), J⁻¹u̇_c(γ)⟩ = 0,    ⟨(u − v₁) − u_c(γ), J⁻¹∂_c u_c(γ)⟩ = 0,
//! ```
//!
//! where `v₁` is the free evolution of the initial perturbation. [`Tracker`]
//! applies the solve sample by sample and records rates and norms.

mod constraints;
mod rates;
mod track;

pub use constraints::{project_pc, project_pc_formula, solve_constraints, ConstraintOptions, ModulationState, NeutralModes};
pub use rates::{
    energy_pin, forcing_n1, forcing_n2, modulation_rates, modulation_rates_direct, rates_from_jet, Rates,
};
pub use track::{split, write_track_csv, ModulationTrack, SplitState, TrackOptions, TrackSample, Tracker};
