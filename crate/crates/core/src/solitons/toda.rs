use num_dual::{Dual2_64, DualNum, HyperDual64};
use serde::{Deserialize, Serialize};

use super::{tangents_from_jet, SolitonTangents, WaveFamily, WaveJet};
use crate::error::{LabError, Result};
use crate::lattice::{hamiltonian, LatticeField, LatticeGrid, Potential};

/// Sites between the wave center and either window edge, in units of `1/κ`.
pub const TODA_EDGE_MARGIN: f64 = 25.0;

/// Solves `sinh κ / κ = c` for `κ > 0`.
pub fn solve_kappa(c: f64) -> Result<f64> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(LabError::SubsonicSpeed { c, sound_speed: 1.0 });
    }
    let f = |k: f64| sinhc(k) - c;
    let (mut lo, mut hi) = (1e-8_f64, (3.0 * (2.0 * c).ln()).max(1.0));
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    // small-κ start from sinh κ/κ ≈ 1 + κ²/6, otherwise from the bracket midpoint
    let mut k = (6.0 * (c - 1.0)).sqrt().clamp(lo, hi);
    for _ in 0..200 {
        let fk = f(k);
        if fk == 0.0 {
            return Ok(k);
        }
        if fk < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let step = fk / dsinhc(k);
        let mut next = k - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-16 * k || hi - lo <= 4.0 * f64::EPSILON * hi {
            k = next;
            break;
        }
        k = next;
    }
    Ok(k)
}

fn sinhc(k: f64) -> f64 {
    if k < 1e-4 {
        1.0 + k * k / 6.0
    } else {
        k.sinh() / k
    }
}

fn dsinhc(k: f64) -> f64 {
    if k < 1e-3 {
        k / 3.0
    } else {
        (k * k.cosh() - k.sinh()) / (k * k)
    }
}

/// `dκ/dc` and `d²κ/dc²` from the inverse-function rule.
pub fn kappa_derivatives(kappa: f64) -> (f64, f64) {
    let c_of_k = Dual2_64::new(kappa, 1.0, 0.0);
    let c = c_of_k.sinh() / c_of_k;
    let d1 = 1.0 / c.v1;
    (d1, -c.v2 * d1 * d1 * d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TodaSoliton {
    pub c: f64,
    pub kappa: f64,
}

impl TodaSoliton {
    pub fn new(c: f64) -> Result<Self> {
        Ok(Self { c, kappa: solve_kappa(c)? })
    }

    /// Exact soliton energy by direct summation over a window wide enough to
    /// hold the profile at phase 0.
    pub fn energy(&self) -> f64 {
        let half = (60.0 / self.kappa).ceil() as i64 + 2;
        (-half..=half)
            .map(|n| {
                let (_, r, p) = toda_profile(self, n as f64);
                0.5 * p * p + Potential::Toda.value(r)
            })
            .sum()
    }
}

/// Numerically safe `sech z` for any dual type.
fn sech<D: DualNum<Primitive = f64> + Copy>(z: D) -> D {
    let a = if z.re() < 0.0 { -z } else { z };
    let e = (-a).exp();
    e * 2.0 / (e * e + 1.0)
}

/// `(r̃, p̃)` at argument `y` with `κ` and `c` carried as dual numbers.
fn profile_rp<D: DualNum<Primitive = f64> + Copy>(kappa: D, c: D, y: D) -> (D, D) {
    let s = kappa.sinh();
    let a = sech(kappa * y);
    let b = sech(kappa * (y - 1.0));
    let r = -(s * s * a * a).ln_1p();
    let p = c * kappa * s * a * b;
    (r, p)
}

fn log_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `(q̃, r̃, p̃)` of the Toda soliton at continuous argument `x`.
pub fn toda_profile(s: &TodaSoliton, x: f64) -> (f64, f64, f64) {
    let k = s.kappa;
    let q = log_cosh(k * (x - 1.0)) - log_cosh(k * x);
    let (r, p) = profile_rp(k, s.c, x);
    (q, r, p)
}

fn check_center(kappa: f64, grid: &LatticeGrid, x0: f64) -> Result<()> {
    let margin = TODA_EDGE_MARGIN / kappa;
    if grid.edge_distance(x0) < margin {
        return Err(LabError::CenterTooCloseToBoundary { center: x0, margin });
    }
    Ok(())
}

/// Samples `r(n) = r̃(n − x₀)`, `p(n) = p̃(n − x₀)`.
pub fn sample_toda(s: &TodaSoliton, grid: &LatticeGrid, x0: f64) -> Result<LatticeField> {
    check_center(s.kappa, grid, x0)?;
    Ok(sample_unchecked(s, grid, x0))
}

fn sample_unchecked(s: &TodaSoliton, grid: &LatticeGrid, x0: f64) -> LatticeField {
    LatticeField::from_parts(
        *grid,
        grid.sites().map(|n| profile_rp(s.kappa, s.c, n as f64 - x0).0).collect(),
        grid.sites().map(|n| profile_rp(s.kappa, s.c, n as f64 - x0).1).collect(),
    )
}

/// Derivatives of the sampled profile in `y = n − x₀` and in `c`.
pub fn toda_jet(s: &TodaSoliton, grid: &LatticeGrid, x0: f64) -> WaveJet {
    let (k1, k2) = kappa_derivatives(s.kappa);
    let len = grid.len();
    let mut jet = WaveJet::zeros(*grid);
    for (i, n) in grid.sites().enumerate() {
        let y = n as f64 - x0;
        // eps1 ↔ c, eps2 ↔ y
        let kh = HyperDual64::new(s.kappa, k1, 0.0, 0.0);
        let ch = HyperDual64::new(s.c, 1.0, 0.0, 0.0);
        let yh = HyperDual64::new(y, 0.0, 1.0, 0.0);
        let (r, p) = profile_rp(kh, ch, yh);
        let (ry, py) = profile_rp(
            Dual2_64::from(s.kappa),
            Dual2_64::from(s.c),
            Dual2_64::new(y, 1.0, 0.0),
        );
        let (rc, pc) = profile_rp(
            Dual2_64::new(s.kappa, k1, k2),
            Dual2_64::new(s.c, 1.0, 0.0),
            Dual2_64::from(y),
        );
        for (f, val) in [
            (&mut jet.u, (r.re, p.re)),
            (&mut jet.dy, (r.eps2, p.eps2)),
            (&mut jet.dc, (r.eps1, p.eps1)),
            (&mut jet.dcy, (r.eps1eps2, p.eps1eps2)),
            (&mut jet.dyy, (ry.v2, py.v2)),
            (&mut jet.dcc, (rc.v2, pc.v2)),
        ] {
            f.r_mut()[i] = val.0;
            f.p_mut()[i] = val.1;
        }
    }
    debug_assert_eq!(jet.u.r().len(), len);
    jet
}

/// Tangent fields at phase `x₀`, with `dH/dc` cross-checked against a centered
/// finite difference of the sampled energy.
pub fn toda_tangents(s: &TodaSoliton, grid: &LatticeGrid, x0: f64) -> Result<SolitonTangents> {
    check_center(s.kappa, grid, x0)?;
    let jet = toda_jet(s, grid, x0);
    let t = tangents_from_jet(&jet, s.c, &Potential::Toda);
    let h = 1e-4 * (s.c - 1.0).min(1.0);
    let energy_at = |c: f64| -> Result<f64> {
        let sol = TodaSoliton::new(c)?;
        hamiltonian(&sample_unchecked(&sol, grid, x0), &Potential::Toda)
    };
    let fd = (energy_at(s.c + h)? - energy_at(s.c - h)?) / (2.0 * h);
    if (fd - t.dhdc).abs() > 1e-6 * t.dhdc.abs() {
        return Err(LabError::TangentInconsistency { analytic: t.dhdc, finite_difference: fd });
    }
    if t.dhdc <= 0.0 {
        return Err(LabError::TangentInconsistency { analytic: t.dhdc, finite_difference: fd });
    }
    Ok(t)
}

/// The Toda 1-soliton family as a [`WaveFamily`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TodaFamily;

impl WaveFamily for TodaFamily {
    fn potential(&self) -> Potential {
        Potential::Toda
    }

    fn sound_speed(&self) -> f64 {
        1.0
    }

    fn decay_rate(&self, c: f64) -> Result<f64> {
        solve_kappa(c)
    }

    fn sample(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<LatticeField> {
        let s = TodaSoliton::new(c)?;
        check_center(s.kappa, grid, x)?;
        Ok(sample_unchecked(&s, grid, x))
    }

    fn jet(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<WaveJet> {
        let s = TodaSoliton::new(c)?;
        check_center(s.kappa, grid, x)?;
        Ok(toda_jet(&s, grid, x))
    }
}
