use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{IntegratorConfig, Scheme, Trajectory};
use crate::error::Result;
use crate::lattice::{LatticeGrid, Potential};

/// Run metadata written next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub grid: LatticeGrid,
    pub potential: Potential,
}

impl TrajectoryMeta {
    pub fn new(cfg: &IntegratorConfig, grid: LatticeGrid, potential: Potential) -> Self {
        Self { scheme: cfg.scheme, dt: cfg.dt, t_end: cfg.t_end, grid, potential }
    }
}

/// Writes `t,energy` rows.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    writeln!(out, "t,energy")?;
    for (t, e) in traj.times.iter().zip(&traj.energies) {
        writeln!(out, "{t},{e}")?;
    }
    Ok(())
}
