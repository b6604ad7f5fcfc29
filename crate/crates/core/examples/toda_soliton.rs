//! Toda solitons across speeds: decay exponent, energy, energy slope, and a
//! log-linear fit of the sampled tail against `2κ`.

use lattice_lab::diagnostics::fit_decay;
use lattice_lab::lattice::LatticeGrid;
use lattice_lab::solitons::{solve_kappa, TodaFamily, TodaSoliton, WaveFamily};

fn main() -> lattice_lab::Result<()> {
    let grid = LatticeGrid::zero_padded(-80, 80)?;
    let fam = TodaFamily;
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "c", "kappa", "H", "dH/dc", "tail rate/2κ");
    for c in [1.05, 1.2, 1.5, 2.0, 3.0, 5.0] {
        let kappa = solve_kappa(c)?;
        let energy = TodaSoliton::new(c)?.energy();
        let dhdc = fam.tangents(c, 0.0, &grid)?.dhdc;
        let u = fam.sample(c, 0.0, &grid)?;
        // |r(n)| for n in [2, 14], read as a decay "in time" n
        let (n, r): (Vec<f64>, Vec<f64>) = grid
            .sites()
            .zip(u.r())
            .filter(|(n, _)| (2..=14).contains(n))
            .map(|(n, r)| (n as f64, r.abs()))
            .unzip();
        let rate = fit_decay(&n, &r, (0.0, f64::INFINITY)).map(|f| f.rate / (2.0 * kappa));
        let rate = rate.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!("{c:>6} {kappa:>10.6} {energy:>12.6} {dhdc:>12.6} {rate:>12}");
    }
    Ok(())
}
