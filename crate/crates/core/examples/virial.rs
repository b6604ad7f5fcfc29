//! The weighted energy ahead of a line moving faster than sound: it decreases
//! for small radiation and increases once a faster soliton crosses the line.

use lattice_lab::diagnostics::{monotonicity_check, VirialSeries, VirialSpec};
use lattice_lab::dynamics::{evolve, IntegratorConfig, Scheme};
use lattice_lab::lattice::{LatticeField, LatticeGrid, Potential};
use lattice_lab::solitons::{TodaFamily, WaveFamily};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, u0: &LatticeField) -> lattice_lab::Result<()> {
    let spec = VirialSpec::new(0.1, 0.0, 1.2, 1.0)?;
    let cfg = IntegratorConfig::new(0.01, Scheme::Rk4, 60.0, 10)?;
    let traj = evolve(u0, &Potential::Toda, &cfg)?;
    let series = VirialSeries::from_trajectory(&traj, &Potential::Toda, &spec);
    let rep = monotonicity_check(&series, 1e-10);
    let last = series.energy.last().copied().unwrap_or(0.0);
    println!(
        "{name:<16} M(0) {:.4e}  M(60) {last:.4e}  max increase {:.2e}  δ̃ {:?}  {}",
        rep.m0,
        rep.max_relative_increase,
        rep.fitted_delta,
        if rep.pass { "monotone" } else { "NOT monotone" }
    );
    Ok(())
}

fn main() -> lattice_lab::Result<()> {
    let grid = LatticeGrid::zero_padded(-120, 200)?;
    for seed in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = LatticeField::from_fn(grid, |n| {
            let e = (-0.5 * (n as f64 / 4.0).powi(2)).exp();
            (e * rng.random_range(-1.0..1.0), e * rng.random_range(-1.0..1.0))
        })?;
        report(&format!("noise seed {seed}"), &f.scaled(1e-2 / f.norm_l2()))?;
    }
    report("soliton c = 1.5", &TodaFamily.sample(1.5, 0.0, &grid)?)?;
    Ok(())
}
