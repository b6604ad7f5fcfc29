//! Lyapunov-type functionals and decay measurements along a run.

mod decay;
mod report;
mod virial;

pub use decay::{fit_decay, tail_norm, trapezoid, v2_integral_bound, DecayFit};
pub use report::{write_series_csv, Check, DiagnosticsReport};
pub use virial::{
    forcing_n3, monotonicity_check, psi, psi_tilde_sq, virial_dissipation, virial_energy, MonotonicityReport,
    VirialSeries, VirialSpec,
};
