//! Solitary wave of the FPU lattice with V(r) = r²/2 + r³ near the sound speed.
//!
//! `cargo run --release --example fpu_profile -- 1.02 > profile.csv`

use lattice_lab::lattice::Potential;
use lattice_lab::solitons::{default_period, solve_fpu_profile, write_profile_csv};

fn main() -> lattice_lab::Result<()> {
    let c: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.02);
    let v = Potential::fpu(1.0, 1.0, 0.0)?;
    let period = default_period(&v, c)?;
    let points = (4.0 * period) as usize;
    let wave = solve_fpu_profile(&v, c, period, points)?;
    eprintln!("c = {c}, box {period}, {points} points, {} iterations", wave.iterations);
    eprintln!("residual {:.2e}, symmetry error {:.2e}", wave.residual, wave.symmetry_error());
    eprintln!("amplitude {:.6e}, decay rate {:.6}, energy {:.6e}", wave.amplitude(), wave.decay_rate()?, wave.energy()?);
    eprintln!("refined defect: h/2 {:.2e}, h/4 {:.2e}", wave.refined_defect(2)?, wave.refined_defect(4)?);
    write_profile_csv(&wave.abscissae(), &wave.profile_r(), &wave.profile_p(), std::io::stdout().lock())
}
