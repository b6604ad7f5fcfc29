use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{LabError, Result};
use crate::lattice::{apply_j, grad_hamiltonian, LatticeField, Potential};

/// Weight line `x̃(t) = x0 + slope t` and steepness `a` of `ψ_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialSpec {
    pub a: f64,
    pub x0: f64,
    pub slope: f64,
}

impl VirialSpec {
    /// `slope` must exceed the sound speed `c_s`.
    pub fn new(a: f64, x0: f64, slope: f64, c_s: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::InvalidArgument(format!("virial a = {a} must be positive")));
        }
        if !(slope > c_s) {
            return Err(LabError::InvalidArgument(format!(
                "virial slope {slope} must exceed the sound speed {c_s}"
            )));
        }
        Ok(Self { a, x0, slope })
    }

    pub fn line(&self, t: f64) -> f64 {
        self.x0 + self.slope * t
    }
}

/// `ψ_a(x) = 1 + tanh(a (x − x̃))`.
pub fn psi(a: f64, x: f64, line: f64) -> f64 {
    1.0 + (a * (x - line)).tanh()
}

/// `ψ̃_a(x)² = a sech²(a (x − x̃)) = ∂ₓψ_a`.
pub fn psi_tilde_sq(a: f64, x: f64, line: f64) -> f64 {
    let s = 1.0 / (a * (x - line)).cosh();
    a * s * s
}

/// `Σ ψ_a(t, n) (½ p(n)² + V(r(n)))`.
pub fn virial_energy(v: &LatticeField, pot: &Potential, spec: &VirialSpec, t: f64) -> f64 {
    let line = spec.line(t);
    v.grid()
        .sites()
        .zip(v.r().iter().zip(v.p()))
        .map(|(n, (&r, &p))| psi(spec.a, n as f64, line) * (0.5 * p * p + pot.value(r)))
        .sum()
}

/// `Σ ψ̃_a(t, n)² (p(n)² + r(n)²)`.
pub fn virial_dissipation(v: &LatticeField, spec: &VirialSpec, t: f64) -> f64 {
    let line = spec.line(t);
    v.grid()
        .sites()
        .zip(v.r().iter().zip(v.p()))
        .map(|(n, (&r, &p))| psi_tilde_sq(spec.a, n as f64, line) * (p * p + r * r))
        .sum()
}

/// `N₃ = J(H'(u_c + v) − H'(u_c) − H'(v))`, the interaction term of the
/// full-remainder virial balance.
pub fn forcing_n3(uc: &LatticeField, v: &LatticeField, pot: &Potential) -> Result<LatticeField> {
    let mut g = grad_hamiltonian(&uc.add(v)?, pot)?;
    g.axpy(-1.0, &grad_hamiltonian(uc, pot)?);
    g.axpy(-1.0, &grad_hamiltonian(v, pot)?);
    Ok(apply_j(&g))
}

/// Sampled `M(t)` (virial energy) and `D(t)` (dissipation density).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl VirialSeries {
    pub fn push(&mut self, t: f64, v: &LatticeField, pot: &Potential, spec: &VirialSpec) {
        self.times.push(t);
        self.energy.push(virial_energy(v, pot, spec, t));
        self.dissipation.push(virial_dissipation(v, spec, t));
    }

    pub fn from_trajectory(traj: &Trajectory, pot: &Potential, spec: &VirialSpec) -> Self {
        let mut s = Self::default();
        for (t, v) in traj.times.iter().zip(&traj.states) {
            s.push(*t, v, pot, spec);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub m0: f64,
    /// Largest `δ̃` with `M(t) + δ̃ ∫₀ᵗ D ≤ M(0)(1 + tol)` at every sample;
    /// `None` when no sample constrains it.
    pub fitted_delta: Option<f64>,
    /// Largest sample-to-sample increase of `M`, relative to `M(0)`.
    pub max_relative_increase: f64,
    pub first_violation: Option<f64>,
    pub tolerance: f64,
}

/// Checks that `M` is non-increasing up to `tol · M(0)` between samples and
/// fits the dissipation constant `δ̃`.
pub fn monotonicity_check(series: &VirialSeries, tol: f64) -> MonotonicityReport {
    let m = &series.energy;
    let m0 = m.first().copied().unwrap_or(0.0);
    let mut first_violation = None;
    let mut max_inc = 0.0_f64;
    for k in 1..m.len() {
        let inc = m[k] - m[k - 1];
        if m0 > 0.0 {
            max_inc = max_inc.max(inc / m0);
        }
        if inc > tol * m0 && first_violation.is_none() {
            first_violation = Some(series.times[k]);
        }
    }
    let mut integral = 0.0;
    let mut delta: Option<f64> = None;
    for k in 1..m.len() {
        let dt = series.times[k] - series.times[k - 1];
        integral += 0.5 * dt * (series.dissipation[k] + series.dissipation[k - 1]);
        if integral > 0.0 {
            let d = (m0 * (1.0 + tol) - m[k]) / integral;
            delta = Some(delta.map_or(d, |x| x.min(d)));
        }
    }
    let pass = first_violation.is_none() && delta.is_none_or(|d| d > 0.0);
    MonotonicityReport {
        pass,
        m0,
        fitted_delta: delta,
        max_relative_increase: max_inc,
        first_violation,
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hamiltonian, LatticeGrid};

    fn grid() -> LatticeGrid {
        LatticeGrid::zero_padded(-200, 200).unwrap()
    }

    fn bump(center: f64) -> LatticeField {
        LatticeField::from_fn(grid(), |n| {
            let y = n as f64 - center;
            let e = 0.01 * (-y * y / 4.0).exp();
            (e, -0.5 * e)
        })
        .unwrap()
    }

    #[test]
    fn psi_derivative_identity() {
        let (a, line) = (0.1, 3.0);
        for k in -40..=40 {
            let x = k as f64 * 0.7;
            let h = 1e-5;
            let fd = (psi(a, x + h, line) - psi(a, x - h, line)) / (2.0 * h);
            assert!((fd - psi_tilde_sq(a, x, line)).abs() < 1e-10);
            let p = psi(a, x, line);
            assert!(p > 0.0 && p < 2.0);
            // discrete difference against the density, within O(a)
            let ratio = (psi(a, x, line) - psi(a, x - 1.0, line)) / psi_tilde_sq(a, x, line);
            assert!((ratio - 1.0).abs() <= 0.2, "{ratio}");
        }
    }

    #[test]
    fn energy_limits() {
        let spec = VirialSpec::new(0.1, 0.0, 1.2, 1.0).unwrap();
        let z = LatticeField::zeros(grid());
        assert_eq!(virial_energy(&z, &Potential::Toda, &spec, 0.0), 0.0);
        assert_eq!(virial_dissipation(&z, &spec, 0.0), 0.0);
        let right = bump(150.0);
        let h = hamiltonian(&right, &Potential::Toda).unwrap();
        let e = virial_energy(&right, &Potential::Toda, &spec, -500.0 / 1.2);
        assert!((e - 2.0 * h).abs() < 1e-10 * h.max(1e-300) + 1e-18);
        let left = bump(-150.0);
        let hl = hamiltonian(&left, &Potential::Toda).unwrap();
        let el = virial_energy(&left, &Potential::Toda, &spec, 0.0);
        assert!(el <= (-2.0 * 0.1 * 140.0_f64).exp() * 2.0 * hl);
    }

    #[test]
    fn dissipation_delta_and_translation() {
        let spec = VirialSpec::new(0.1, 7.0, 1.2, 1.0).unwrap();
        let mut d = LatticeField::zeros(grid());
        d.r_mut()[grid().slot(7).unwrap()] = 0.3;
        d.p_mut()[grid().slot(7).unwrap()] = 0.4;
        assert!((virial_dissipation(&d, &spec, 0.0) - 0.1 * 0.25).abs() < 1e-15);
        let v = bump(0.0);
        let moved = v.shifted(12);
        let s2 = VirialSpec { x0: spec.x0 + 12.0, ..spec };
        assert!((virial_dissipation(&v, &spec, 0.0) - virial_dissipation(&moved, &s2, 0.0)).abs() < 1e-18);
    }

    #[test]
    fn monotonicity_bookkeeping() {
        let empty = VirialSeries { times: vec![0.0, 1.0], energy: vec![0.0, 0.0], dissipation: vec![0.0, 0.0] };
        let rep = monotonicity_check(&empty, 1e-10);
        assert!(rep.pass && rep.fitted_delta.is_none());
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let energy: Vec<f64> = times.iter().map(|t| (-0.1 * t).exp()).collect();
        let dissipation: Vec<f64> = times.iter().map(|t| 0.1 * (-0.1 * t).exp()).collect();
        let rep = monotonicity_check(&VirialSeries { times: times.clone(), energy, dissipation }, 1e-10);
        assert!(rep.pass);
        assert!((rep.fitted_delta.unwrap() - 1.0).abs() < 1e-2, "{rep:?}");
        let energy: Vec<f64> = times.iter().map(|t| 1.0 + 0.01 * t).collect();
        let rep = monotonicity_check(
            &VirialSeries { times, energy, dissipation: vec![1.0; 20] },
            1e-10,
        );
        assert!(!rep.pass && rep.first_violation == Some(1.0));
    }
}
