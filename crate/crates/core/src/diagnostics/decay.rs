use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::LatticeField;
use crate::modulation::ModulationTrack;

/// Least-squares fit `log value ≈ intercept − rate · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits an exponential rate to the samples with `t` in `window`.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(LabError::InvalidArgument("times and values differ in length".into()));
    }
    if !(window.0 < window.1) {
        return Err(LabError::InvalidArgument(format!("empty fit window {window:?}")));
    }
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(LabError::NonPositiveSeries { t });
        }
        pts.push((t, v.ln()));
    }
    if pts.len() < 10 {
        return Err(LabError::InvalidArgument(format!(
            "decay fit needs at least 10 samples in {window:?}, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit { rate: -slope, intercept, r_squared, window, samples: pts.len() })
}

/// `l²` norm of `u − reference` over the sites `n ≥ σt`.
pub fn tail_norm(u: &LatticeField, sigma: f64, t: f64, reference: Option<&LatticeField>) -> Result<f64> {
    let grid = u.grid();
    let start = sigma * t;
    if start > grid.n_max as f64 {
        return Err(LabError::WindowExceeded(format!("σt = {start} beyond n_max = {}", grid.n_max)));
    }
    if let Some(r) = reference {
        grid.ensure_same(r.grid())?;
    }
    let mut s = 0.0;
    for (i, n) in grid.sites().enumerate() {
        if (n as f64) < start {
            continue;
        }
        let (mut a, mut b) = (u.r()[i], u.p()[i]);
        if let Some(r) = reference {
            a -= r.r()[i];
            b -= r.p()[i];
        }
        s += a * a + b * b;
    }
    Ok(s.sqrt())
}

pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `∫ ‖v₂‖²_{X(t)} dt / ‖v₀‖²_{l²}` over the track (zero when `v₀ = 0`).
pub fn v2_integral_bound(track: &ModulationTrack) -> f64 {
    if track.v0_norm == 0.0 {
        return 0.0;
    }
    let sq = track.column(|s| s.norm_v2_x * s.norm_v2_x);
    trapezoid(&track.times(), &sq) / (track.v0_norm * track.v0_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeGrid;
    use crate::solitons::{TodaFamily, WaveFamily};

    fn ts() -> Vec<f64> {
        (0..=100).map(|k| k as f64 * 0.5).collect()
    }

    #[test]
    fn exact_exponential() {
        let t = ts();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.5 * t).exp()).collect();
        let f = fit_decay(&t, &v, (0.0, 50.0)).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-10 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn constant_and_modulated_series() {
        let t = ts();
        let f = fit_decay(&t, &vec![2.0; t.len()], (0.0, 50.0)).unwrap();
        assert_eq!(f.rate, 0.0);
        let v: Vec<f64> = t.iter().map(|t| (-0.5 * t).exp() * (1.0 + 0.01 * t.sin())).collect();
        let f = fit_decay(&t, &v, (0.0, 50.0)).unwrap();
        assert!((f.rate - 0.5).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_input() {
        let t = ts();
        let mut v = vec![1.0; t.len()];
        v[10] = 0.0;
        assert!(matches!(fit_decay(&t, &v, (0.0, 50.0)), Err(LabError::NonPositiveSeries { t }) if t == 5.0));
        assert!(fit_decay(&t, &vec![1.0; t.len()], (0.0, 2.0)).is_err());
    }

    #[test]
    fn tail_norm_cases() {
        let g = LatticeGrid::zero_padded(-100, 300).unwrap();
        let fam = TodaFamily;
        let u = fam.sample(1.5, 150.0, &g).unwrap();
        assert_eq!(tail_norm(&u, 1.2, 100.0, Some(&u)).unwrap(), 0.0);
        let bump = LatticeField::from_fn(g, |n| {
            let y = n as f64 + 20.0;
            (0.1 * (-y * y / 10.0).exp(), 0.0)
        })
        .unwrap();
        let both = u.add(&bump).unwrap();
        assert!(tail_norm(&both, 1.2, 100.0, Some(&u)).unwrap() < 1e-300);
        assert!(matches!(tail_norm(&u, 1.2, 300.0, None), Err(LabError::WindowExceeded(_))));
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let t = [0.0, 1.0, 3.0];
        assert!((trapezoid(&t, &[1.0, 2.0, 4.0]) - 7.5).abs() < 1e-15);
    }
}
