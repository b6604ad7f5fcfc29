//! How the three weighted norms see a soliton and a trailing bump.

use lattice_lab::lattice::{weighted_norm_centered, LatticeField, LatticeGrid, NormKind};
use lattice_lab::solitons::{solve_kappa, TodaFamily, WaveFamily};

fn main() -> lattice_lab::Result<()> {
    let grid = LatticeGrid::zero_padded(-100, 100)?;
    let c = 1.5;
    let kappa = solve_kappa(c)?;
    let wave = TodaFamily.sample(c, 0.0, &grid)?;
    let a = 0.2;
    println!("soliton at 0, a = {a}, kappa = {kappa:.4}");
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "bump at", "l2", "X", "W", "X(wave)");
    for center in [-40.0, -20.0, -10.0, 0.0, 10.0] {
        let bump = LatticeField::from_fn(grid, |n| {
            let y = n as f64 - center;
            ((-y * y / 8.0).exp(), 0.0)
        })?;
        let x = weighted_norm_centered(&bump, a, NormKind::X, 0.0, None)?;
        let w = weighted_norm_centered(&bump, a, NormKind::W, 0.0, Some(kappa))?;
        let xw = weighted_norm_centered(&wave, a, NormKind::X, 0.0, None)?;
        println!("{center:>8} {:>12.4e} {x:>12.4e} {w:>12.4e} {xw:>12.4e}", bump.norm_l2());
    }
    Ok(())
}
