//! Evolve an exact Toda soliton and compare against the analytic traveling wave.

use lattice_lab::dynamics::{evolve_observed, phase_error, IntegratorConfig, Scheme};
use lattice_lab::lattice::{hamiltonian, LatticeGrid, Potential};
use lattice_lab::solitons::{TodaFamily, WaveFamily};

fn run(dt: f64) -> lattice_lab::Result<(f64, f64, f64)> {
    let c = 1.5;
    let grid = LatticeGrid::zero_padded(-300, 300)?;
    let fam = TodaFamily;
    let x0 = -40.0;
    let u0 = fam.sample(c, x0, &grid)?;
    let h0 = hamiltonian(&u0, &Potential::Toda)?;
    let cfg = IntegratorConfig::new(dt, Scheme::StormerVerlet, 50.0, (1.0 / dt).round() as usize)?;
    let mut worst = 0.0_f64;
    let mut drift = 0.0_f64;
    let end = evolve_observed(&u0, &Potential::Toda, &cfg, |t, u| {
        let (err, _) = phase_error(u, &fam, c, x0 + c * t)?;
        worst = worst.max(err);
        drift = drift.max((hamiltonian(u, &Potential::Toda)? - h0).abs() / h0);
        Ok(())
    })?;
    let end_drift = (hamiltonian(&end, &Potential::Toda)? - h0).abs() / h0;
    Ok((worst, drift, end_drift))
}

fn main() -> lattice_lab::Result<()> {
    let (e1, d1, f1) = run(0.01)?;
    let (e2, d2, f2) = run(0.005)?;
    println!("dt = 0.01   phase-optimized error {e1:.3e}, max |H(t)-H(0)|/H {d1:.3e}, |H(T)-H(0)|/H {f1:.3e}");
    println!("dt = 0.005  phase-optimized error {e2:.3e}, max |H(t)-H(0)|/H {d2:.3e}, |H(T)-H(0)|/H {f2:.3e}");
    println!("error ratio {:.3}", e1 / e2);
    Ok(())
}
