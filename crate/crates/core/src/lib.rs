//! Solitary waves on Toda and FPU lattices: profiles, time stepping,
//! modulation tracking and stability diagnostics.
//!
//! The modules build on each other in order: [`lattice`] fields and operators,
//! [`solitons`] wave families, [`dynamics`] integrators, [`modulation`]
//! parameter tracking, [`diagnostics`] decay and virial checks, and
//! [`experiments`] scenarios and suites.

// NaN must fail range guards, so `!(x > y)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod lattice;
pub mod solitons;
pub mod dynamics;
pub mod modulation;
pub mod diagnostics;
pub mod experiments;

pub use error::{LabError, Result};
