//! Tracks (c, x) of a Toda soliton hit by a small bump, and prints the split
//! norms along the way.

use lattice_lab::dynamics::{Scheme, Stepper};
use lattice_lab::lattice::{LatticeField, LatticeGrid, Potential};
use lattice_lab::modulation::{TrackOptions, Tracker};
use lattice_lab::solitons::{TodaFamily, WaveFamily};

fn main() -> lattice_lab::Result<()> {
    let (c0, eps, dt) = (1.5, 1e-2, 0.0025);
    let grid = LatticeGrid::zero_padded(-200, 260)?;
    let fam = TodaFamily;
    let v0 = LatticeField::from_fn(grid, |n| {
        let y = (n as f64 + 3.0) / 2.0;
        (eps * (-y * y).exp(), 0.0)
    })?;
    let u0 = fam.sample(c0, 0.0, &grid)?.add(&v0)?;
    let mut u = Stepper::new(u0, Potential::Toda, Scheme::Rk4, dt)?;
    let mut v1 = Stepper::new(v0.clone(), Potential::Toda, Scheme::Rk4, dt)?;
    let mut tracker = Tracker::new(&fam, c0, 0.0, c0, v0.norm_l2(), TrackOptions::new(0.2));
    println!("{:>6} {:>14} {:>12} {:>11} {:>11} {:>11}", "t", "c − c0", "x − c0 t", "ċ", "‖v₁‖_W", "‖v₂‖_X");
    let every = (10.0 / dt) as usize;
    for k in 0..=(120.0 / dt) as usize {
        if k > 0 {
            u.step()?;
            v1.step()?;
        }
        if k % every == 0 {
            let t = k as f64 * dt;
            tracker.observe(t, u.state(), v1.state())?;
            let s = tracker.track().samples.last().unwrap();
            println!(
                "{t:>6.1} {:>14.6e} {:>12.6} {:>11.3e} {:>11.3e} {:>11.3e}",
                s.c - c0,
                s.x - c0 * t,
                s.cdot,
                s.norm_v1_w,
                s.norm_v2_x
            );
        }
    }
    let track = tracker.into_track();
    println!("c₊ = {:.10}, max constraint residual {:.2e}", track.c_plus().unwrap(), track.max_residual());
    Ok(())
}
