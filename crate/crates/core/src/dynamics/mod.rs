//! Time integration of the nonlinear lattice and of its linearization along a
//! traveling wave.

mod io;

pub use io::{write_trajectory_csv, TrajectoryMeta};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{hamiltonian, Boundary, LatticeField, LatticeGrid, Potential};
use crate::solitons::WaveFamily;

pub const MAX_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    StormerVerlet,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_dt() -> f64 {
    0.01
}

fn default_sample_every() -> usize {
    10
}

impl IntegratorConfig {
    pub fn new(dt: f64, scheme: Scheme, t_end: f64, sample_every: usize) -> Result<Self> {
        let cfg = Self { dt, scheme, t_end, sample_every };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(LabError::InvalidArgument(format!("dt = {} must lie in (0, {MAX_DT}]", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(LabError::InvalidArgument(format!("t_end = {} must be finite and ≥ 0", self.t_end)));
        }
        if self.sample_every == 0 {
            return Err(LabError::InvalidArgument("sample_every must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `t_end` is rounded to a whole number of steps.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// True when step `k` is a sample (always including the first and last step).
    pub fn is_sample(&self, k: usize) -> bool {
        k.is_multiple_of(self.sample_every) || k == self.steps()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<LatticeField>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&LatticeField> {
        self.states.last()
    }

    /// `max |H(t) − H(0)|` over samples with `t ≤ t_max`.
    pub fn energy_drift(&self, t_max: f64) -> f64 {
        let h0 = self.energies.first().copied().unwrap_or(0.0);
        self.times
            .iter()
            .zip(&self.energies)
            .filter(|(t, _)| **t <= t_max + 1e-12)
            .fold(0.0_f64, |m, (_, h)| m.max((h - h0).abs()))
    }
}

/// Writes `out = J (w_r, w_p)` for the grid's boundary rule, where `w_r` is
/// already the force term `V'(r)` (or `V''(r̃) v_r`).
fn j_apply_into(boundary: Boundary, wr: &[f64], wp: &[f64], out_r: &mut [f64], out_p: &mut [f64]) {
    let n = wr.len();
    for i in 0..n - 1 {
        out_r[i] = wp[i + 1] - wp[i];
    }
    for i in 1..n {
        out_p[i] = wr[i] - wr[i - 1];
    }
    match boundary {
        Boundary::ZeroPadding => {
            out_r[n - 1] = -wp[n - 1];
            out_p[0] = wr[0];
        }
        Boundary::Periodic => {
            out_r[n - 1] = wp[0] - wp[n - 1];
            out_p[0] = wr[0] - wr[n - 1];
        }
    }
}

/// Single-trajectory integrator with explicit stepping, for callers that do
/// not want every sample held in memory.
#[derive(Debug, Clone)]
pub struct Stepper {
    state: LatticeField,
    potential: Potential,
    scheme: Scheme,
    dt: f64,
    steps_taken: usize,
    force: Vec<f64>,
    k: [Vec<f64>; 8],
    stage: LatticeField,
}

impl Stepper {
    pub fn new(u0: LatticeField, potential: Potential, scheme: Scheme, dt: f64) -> Result<Self> {
        u0.ensure_finite()?;
        potential.validate()?;
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(LabError::InvalidArgument(format!("dt = {dt} must lie in (0, {MAX_DT}]")));
        }
        let n = u0.grid().len();
        let z = vec![0.0; n];
        Ok(Self {
            stage: u0.clone(),
            state: u0,
            potential,
            scheme,
            dt,
            steps_taken: 0,
            force: z.clone(),
            k: std::array::from_fn(|_| z.clone()),
        })
    }

    pub fn state(&self) -> &LatticeField {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn into_state(self) -> LatticeField {
        self.state
    }

    pub fn step(&mut self) -> Result<()> {
        match self.scheme {
            Scheme::StormerVerlet => self.verlet_step(),
            Scheme::Rk4 => self.rk4_step(),
        }
        self.steps_taken += 1;
        if !self.state.is_finite() {
            return Err(LabError::BlowUp { t: self.time() });
        }
        Ok(())
    }

    /// Kick–drift–kick on `q̈(n) = V'(r(n)) − V'(r(n−1))`, written for `(r, p)`.
    fn verlet_step(&mut self) {
        let dt = self.dt;
        let boundary = self.state.grid().boundary;
        let v = self.potential;
        let n = self.force.len();
        let kick = |state: &mut LatticeField, force: &mut [f64]| {
            for (f, &r) in force.iter_mut().zip(state.r()) {
                *f = v.d1(r);
            }
            let p = state.p_mut();
            for i in (1..n).rev() {
                p[i] += 0.5 * dt * (force[i] - force[i - 1]);
            }
            p[0] += 0.5 * dt * match boundary {
                Boundary::ZeroPadding => force[0],
                Boundary::Periodic => force[0] - force[n - 1],
            };
        };
        kick(&mut self.state, &mut self.force);
        {
            let (r, p) = self.state.parts_mut();
            for i in 0..n - 1 {
                r[i] += dt * (p[i + 1] - p[i]);
            }
            r[n - 1] += dt * match boundary {
                Boundary::ZeroPadding => -p[n - 1],
                Boundary::Periodic => p[0] - p[n - 1],
            };
        }
        kick(&mut self.state, &mut self.force);
    }

    fn rhs(&mut self, slot: usize) {
        let v = self.potential;
        let boundary = self.stage.grid().boundary;
        for (f, &r) in self.force.iter_mut().zip(self.stage.r()) {
            *f = v.d1(r);
        }
        let (a, b) = self.k.split_at_mut(2 * slot + 1);
        j_apply_into(boundary, &self.force, self.stage.p(), &mut a[2 * slot], &mut b[0]);
    }

    fn rk4_step(&mut self) {
        let dt = self.dt;
        let n = self.force.len();
        let coeffs = [0.5 * dt, 0.5 * dt, dt];
        self.stage = self.state.clone();
        for s in 0..4 {
            self.rhs(s);
            if s < 3 {
                let c = coeffs[s];
                let (kr, kp) = (&self.k[2 * s], &self.k[2 * s + 1]);
                let stage_r = self.stage.r_mut();
                for i in 0..n {
                    stage_r[i] = self.state.r()[i] + c * kr[i];
                }
                let stage_p = self.stage.p_mut();
                for i in 0..n {
                    stage_p[i] = self.state.p()[i] + c * kp[i];
                }
            }
        }
        let w = dt / 6.0;
        let k = &self.k;
        let r = self.state.r_mut();
        for i in 0..n {
            r[i] += w * (k[0][i] + 2.0 * k[2][i] + 2.0 * k[4][i] + k[6][i]);
        }
        let p = self.state.p_mut();
        for i in 0..n {
            p[i] += w * (k[1][i] + 2.0 * k[3][i] + 2.0 * k[5][i] + k[7][i]);
        }
    }
}

/// Integrates `du/dt = J H'(u)` and calls `observe(t, u)` at every sample.
/// Returns the final state.
pub fn evolve_observed<F>(u0: &LatticeField, v: &Potential, cfg: &IntegratorConfig, mut observe: F) -> Result<LatticeField>
where
    F: FnMut(f64, &LatticeField) -> Result<()>,
{
    cfg.validate()?;
    let mut stepper = Stepper::new(u0.clone(), *v, cfg.scheme, cfg.dt)?;
    observe(0.0, stepper.state())?;
    for k in 1..=cfg.steps() {
        stepper.step()?;
        if cfg.is_sample(k) {
            observe(stepper.time(), stepper.state())?;
        }
    }
    Ok(stepper.into_state())
}

/// Integrates `du/dt = J H'(u)` and stores every sample.
pub fn evolve(u0: &LatticeField, v: &Potential, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), energies: Vec::new() };
    evolve_observed(u0, v, cfg, |t, u| {
        traj.times.push(t);
        traj.energies.push(hamiltonian(u, v)?);
        traj.states.push(u.clone());
        Ok(())
    })?;
    Ok(traj)
}

/// Integrates the linearization `dv/dt = J H''(u_{c₀}(t)) v` around the wave
/// `ũ_{c₀}(n − x₀ − c₀t)` with classical RK4; `V''(r̃)` is re-evaluated at
/// every stage time. The scheme field of `cfg` is ignored.
pub fn evolve_linearized(
    v0: &LatticeField,
    family: &dyn WaveFamily,
    c0: f64,
    cfg: &IntegratorConfig,
    x0: f64,
) -> Result<Trajectory> {
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), energies: Vec::new() };
    evolve_linearized_observed(v0, family, c0, cfg, x0, |t, v: &mut LatticeField| {
        traj.times.push(t);
        traj.energies.push(0.5 * v.norm_l2().powi(2));
        traj.states.push(v.clone());
        Ok(())
    })?;
    Ok(traj)
}

/// Streaming form of [`evolve_linearized`]. The observer may modify the
/// state in place (e.g. to re-project it); integration continues from the
/// modified state.
pub fn evolve_linearized_observed<F>(
    v0: &LatticeField,
    family: &dyn WaveFamily,
    c0: f64,
    cfg: &IntegratorConfig,
    x0: f64,
    mut observe: F,
) -> Result<LatticeField>
where
    F: FnMut(f64, &mut LatticeField) -> Result<()>,
{
    cfg.validate()?;
    v0.ensure_finite()?;
    let grid: LatticeGrid = *v0.grid();
    let pot = family.potential();
    let coeff = |t: f64| -> Result<Vec<f64>> {
        let u = family.sample(c0, x0 + c0 * t, &grid)?;
        Ok(u.r().iter().map(|&r| pot.d2(r)).collect())
    };
    let n = grid.len();
    let rhs = |a: &[f64], v: &LatticeField, out: &mut LatticeField| {
        let wr: Vec<f64> = a.iter().zip(v.r()).map(|(a, r)| a * r).collect();
        let (or, op) = out.parts_mut();
        j_apply_into(grid.boundary, &wr, v.p(), or, op);
    };
    let dt = cfg.dt;
    let mut v = v0.clone();
    let mut ks: [LatticeField; 4] = std::array::from_fn(|_| LatticeField::zeros(grid));
    observe(0.0, &mut v)?;
    let mut a_start = coeff(0.0)?;
    for k in 1..=cfg.steps() {
        let t = (k - 1) as f64 * dt;
        let a_mid = coeff(t + 0.5 * dt)?;
        let a_end = coeff(t + dt)?;
        rhs(&a_start, &v, &mut ks[0]);
        let mut stage = v.clone();
        stage.axpy(0.5 * dt, &ks[0]);
        rhs(&a_mid, &stage, &mut ks[1]);
        stage = v.clone();
        stage.axpy(0.5 * dt, &ks[1]);
        rhs(&a_mid, &stage, &mut ks[2]);
        stage = v.clone();
        stage.axpy(dt, &ks[2]);
        rhs(&a_end, &stage, &mut ks[3]);
        for (s, w) in [(0, 1.0), (1, 2.0), (2, 2.0), (3, 1.0)] {
            v.axpy(dt * w / 6.0, &ks[s]);
        }
        debug_assert_eq!(v.r().len(), n);
        if !v.is_finite() {
            return Err(LabError::BlowUp { t: k as f64 * dt });
        }
        a_start = a_end;
        if cfg.is_sample(k) {
            observe(k as f64 * dt, &mut v)?;
        }
    }
    Ok(v)
}

/// `min_y ‖u − ũ_c(· − y)‖_{l²}` over `|y − guess| ≤ 1`, by golden-section
/// search. Returns `(error, y*)`.
pub fn phase_error(u: &LatticeField, family: &dyn WaveFamily, c: f64, guess: f64) -> Result<(f64, f64)> {
    let grid = *u.grid();
    let dist = |y: f64| -> Result<f64> { Ok(u.sub(&family.sample(c, y, &grid)?)?.norm_l2()) };
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (guess - 1.0, guess + 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (dist(x1)?, dist(x2)?);
    while b - a > 1e-10 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = dist(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = dist(x2)?;
        }
    }
    let y = 0.5 * (a + b);
    Ok((dist(y)?, y))
}
