use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{energy_pin, rates_from_jet, solve_constraints, ConstraintOptions, ModulationState};
use crate::dynamics::Trajectory;
use crate::error::{LabError, Result};
use crate::lattice::{weighted_norm_centered, LatticeField, NormKind};
use crate::solitons::WaveFamily;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Exponent of the one-sided `X(t)` weight used for `v₂`.
    pub a: f64,
    /// Exponent of the two-sided `W(t)` weight used for `v₁`.
    pub kappa: f64,
    #[serde(default)]
    pub constraints: ConstraintOptions,
}

impl TrackOptions {
    pub fn new(a: f64) -> Self {
        Self { a, kappa: a, constraints: ConstraintOptions::default() }
    }
}

/// One row of a modulation track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub c: f64,
    pub gamma: f64,
    pub x: f64,
    pub xdot: f64,
    pub cdot: f64,
    pub f1: f64,
    pub f2: f64,
    pub norm_v_l2: f64,
    pub norm_v1_w: f64,
    pub norm_v2_x: f64,
    pub energy_pin: f64,
}

/// `v = u − u_c(γ)`, its free part `v₁` and the remainder `v₂ = v − v₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub v: LatticeField,
    pub v1: LatticeField,
    pub v2: LatticeField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationTrack {
    pub c0: f64,
    pub v0_norm: f64,
    pub samples: Vec<TrackSample>,
}

impl ModulationTrack {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn column(&self, f: impl Fn(&TrackSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    /// Mean of `c` over the last `fraction` of the samples.
    pub fn tail_average(&self, fraction: f64) -> Option<f64> {
        let n = self.samples.len();
        if n == 0 {
            return None;
        }
        let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        Some(self.samples[n - k..].iter().map(|s| s.c).sum::<f64>() / k as f64)
    }

    /// `c₊`, the mean speed over the final 20% of samples.
    pub fn c_plus(&self) -> Option<f64> {
        self.tail_average(0.2)
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.f1.abs().max(s.f2.abs())).fold(0.0, f64::max)
    }

    /// `sup_t (|c(t) − c₀| + |ẋ(t) − c₀|)`.
    pub fn sup_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.c - self.c0).abs() + (s.xdot - self.c0).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_energy_pin(&self) -> f64 {
        self.samples.iter().map(|s| s.energy_pin).fold(0.0, f64::max)
    }

    /// Sample closest to time `t`.
    pub fn at(&self, t: f64) -> Option<&TrackSample> {
        self.samples.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Centered differences of the tracked `c(t)` at interior samples, as
    /// `(t, (c(t+) − c(t−))/(t+ − t−), algebraic ċ(t))`.
    pub fn cdot_cross_check(&self) -> Vec<(f64, f64, f64)> {
        self.samples
            .windows(3)
            .map(|w| (w[1].t, (w[2].c - w[0].c) / (w[2].t - w[0].t), w[1].cdot))
            .collect()
    }
}

/// Writes the track as
/// `t,c,gamma,x,xdot,cdot,F1,F2,norm_v_l2,norm_v1_W,norm_v2_X,energy_pin`.
pub fn write_track_csv<W: Write>(track: &ModulationTrack, mut out: W) -> Result<()> {
    writeln!(out, "t,c,gamma,x,xdot,cdot,F1,F2,norm_v_l2,norm_v1_W,norm_v2_X,energy_pin")?;
    for s in &track.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.t, s.c, s.gamma, s.x, s.xdot, s.cdot, s.f1, s.f2, s.norm_v_l2, s.norm_v1_w, s.norm_v2_x, s.energy_pin
        )?;
    }
    Ok(())
}

/// Streaming decomposition: feed `(t, u(t), v₁(t))` in time order.
///
/// Each constraint solve is warm-started from the previous sample, with the
/// center advanced by the previous `ẋ`.
pub struct Tracker<'a> {
    family: &'a dyn WaveFamily,
    opts: TrackOptions,
    guess: (f64, f64),
    last: Option<(f64, f64)>,
    track: ModulationTrack,
}

impl<'a> Tracker<'a> {
    pub fn new(
        family: &'a dyn WaveFamily,
        c_init: f64,
        gamma_init: f64,
        c0: f64,
        v0_norm: f64,
        opts: TrackOptions,
    ) -> Self {
        Self {
            family,
            opts,
            guess: (c_init, c_init * gamma_init),
            last: None,
            track: ModulationTrack { c0, v0_norm, samples: Vec::new() },
        }
    }

    pub fn track(&self) -> &ModulationTrack {
        &self.track
    }

    pub fn into_track(self) -> ModulationTrack {
        self.track
    }

    pub fn observe(&mut self, t: f64, u: &LatticeField, v1: &LatticeField) -> Result<(ModulationState, SplitState)> {
        let index = self.track.len();
        self.observe_inner(t, u, v1)
            .map_err(|e| LabError::SampleFailure { index, t, source: Box::new(e) })
    }

    fn observe_inner(
        &mut self,
        t: f64,
        u: &LatticeField,
        v1: &LatticeField,
    ) -> Result<(ModulationState, SplitState)> {
        let (mut c_init, mut x_init) = self.guess;
        if let Some((t_prev, xdot)) = self.last {
            let s = self.track.samples.last().expect("previous sample");
            c_init = s.c;
            x_init = s.x + xdot * (t - t_prev);
        }
        let w = u.sub(v1)?;
        let st = solve_constraints(u, &w, c_init, x_init / c_init, self.family, &self.opts.constraints)?;
        let grid = *u.grid();
        let jet = self.family.jet(st.c, st.x, &grid)?;
        let v = u.sub(&jet.u)?;
        let v2 = v.sub(v1)?;
        let rates = rates_from_jet(&jet, st.c, &v, &v2, &self.family.potential())?;
        let xdot = rates.xdot(st.c);
        let sample = TrackSample {
            t,
            c: st.c,
            gamma: st.gamma,
            x: st.x,
            xdot,
            cdot: rates.cdot,
            f1: st.f1,
            f2: st.f2,
            norm_v_l2: v.norm_l2(),
            norm_v1_w: weighted_norm_centered(v1, self.opts.a, NormKind::W, st.x, Some(self.opts.kappa))?,
            norm_v2_x: weighted_norm_centered(&v2, self.opts.a, NormKind::X, st.x, None)?,
            energy_pin: energy_pin(&v, st.c, self.track.c0, self.track.v0_norm),
        };
        self.track.samples.push(sample);
        self.last = Some((t, xdot));
        Ok((st, SplitState { v, v1: v1.clone(), v2 }))
    }
}

/// Decomposes a sampled run. `u_traj` and `v1_traj` must share times and grid.
#[allow(clippy::too_many_arguments)]
pub fn split(
    u_traj: &Trajectory,
    v1_traj: &Trajectory,
    c_init: f64,
    gamma_init: f64,
    family: &dyn WaveFamily,
    c0: f64,
    v0_norm: f64,
    opts: TrackOptions,
) -> Result<ModulationTrack> {
    if u_traj.len() != v1_traj.len() || u_traj.times.iter().zip(&v1_traj.times).any(|(a, b)| a != b) {
        return Err(LabError::InvalidArgument("trajectories must share sample times".into()));
    }
    let mut tracker = Tracker::new(family, c_init, gamma_init, c0, v0_norm, opts);
    for ((t, u), v1) in u_traj.times.iter().zip(&u_traj.states).zip(&v1_traj.states) {
        u.grid().ensure_same(v1.grid())?;
        tracker.observe(*t, u, v1)?;
    }
    Ok(tracker.into_track())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, IntegratorConfig, Scheme};
    use crate::lattice::{LatticeGrid, Potential};
    use crate::solitons::TodaFamily;

    fn grid() -> LatticeGrid {
        LatticeGrid::zero_padded(-120, 200).unwrap()
    }

    #[test]
    fn unperturbed_wave_tracks_exactly() {
        let fam = TodaFamily;
        let u0 = fam.sample(1.5, -20.0, &grid()).unwrap();
        let cfg = IntegratorConfig::new(0.01, Scheme::Rk4, 20.0, 100).unwrap();
        let ut = evolve(&u0, &Potential::Toda, &cfg).unwrap();
        let z = LatticeField::zeros(grid());
        let v1 = evolve(&z, &Potential::Toda, &cfg).unwrap();
        let track = split(&ut, &v1, 1.5, -20.0 / 1.5, &fam, 1.5, 0.0, TrackOptions::new(0.1)).unwrap();
        assert_eq!(track.len(), ut.len());
        for s in &track.samples {
            assert!((s.c - 1.5).abs() < 1e-8, "{s:?}");
            assert!((s.x - (-20.0 + 1.5 * s.t)).abs() < 1e-6, "{s:?}");
            // v is integrator error only
            assert!(s.norm_v2_x < 1e-6 && s.energy_pin < 1e-4, "{s:?}");
        }
        assert!((track.c_plus().unwrap() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn first_sample_split_is_definitional() {
        let fam = TodaFamily;
        let bump = LatticeField::from_fn(grid(), |n| {
            let y = n as f64 + 5.0;
            (1e-2 * (-y * y / 8.0).exp(), 0.0)
        })
        .unwrap();
        let u0 = fam.sample(1.5, 0.0, &grid()).unwrap().add(&bump).unwrap();
        let mut tr = Tracker::new(&fam, 1.5, 0.0, 1.5, bump.norm_l2(), TrackOptions::new(0.1));
        let (st, sp) = tr.observe(0.0, &u0, &bump).unwrap();
        let direct = u0.sub(&bump).unwrap().sub(&fam.sample(st.c, st.x, &grid()).unwrap()).unwrap();
        assert!(sp.v2.sub(&direct).unwrap().norm_sup() < 1e-15);
        assert!(st.f1.abs() <= 1e-9 && st.f2.abs() <= 1e-9);
    }

    #[test]
    fn failures_carry_the_sample_index() {
        let fam = TodaFamily;
        let u = fam.sample(1.5, 0.0, &grid()).unwrap();
        let mut tr = Tracker::new(&fam, 1.5, 0.0, 1.5, 0.0, TrackOptions::new(0.1));
        tr.observe(0.0, &u, &LatticeField::zeros(grid())).unwrap();
        let junk = LatticeField::from_fn(grid(), |n| (if n == 5 { 5.0 } else { 0.0 }, 0.0)).unwrap();
        let err = tr.observe(1.0, &junk, &LatticeField::zeros(grid())).unwrap_err();
        assert!(matches!(err, LabError::SampleFailure { index: 1, .. }), "{err}");
    }

    #[test]
    fn csv_header_and_row_count() {
        let track = ModulationTrack {
            c0: 1.5,
            v0_norm: 0.0,
            samples: vec![TrackSample {
                t: 0.0,
                c: 1.5,
                gamma: 0.0,
                x: 0.0,
                xdot: 1.5,
                cdot: 0.0,
                f1: 0.0,
                f2: 0.0,
                norm_v_l2: 0.0,
                norm_v1_w: 0.0,
                norm_v2_x: 0.0,
                energy_pin: 0.0,
            }],
        };
        let mut buf = Vec::new();
        write_track_csv(&track, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("t,c,gamma,x,xdot,cdot,F1,F2,norm_v_l2,norm_v1_W,norm_v2_X,energy_pin\n"));
    }
}
