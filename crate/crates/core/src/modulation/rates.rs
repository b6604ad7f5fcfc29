use serde::{Deserialize, Serialize};

use super::ModulationState;
use crate::error::{LabError, Result};
use crate::lattice::{apply_j, apply_j_inverse, grad_hamiltonian, hessian_apply, inner, LatticeField, Potential};
use crate::solitons::{WaveFamily, WaveJet};

/// Instantaneous modulation rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub cdot: f64,
    /// `ẋ − c`
    pub xdot_minus_c: f64,
}

impl Rates {
    pub fn xdot(&self, c: f64) -> f64 {
        c + self.xdot_minus_c
    }
}

/// `N₁ = J(H'(u_c + v) − H'(u_c) − H''(u_c) v)`.
pub fn forcing_n1(uc: &LatticeField, v: &LatticeField, pot: &Potential) -> Result<LatticeField> {
    let full = grad_hamiltonian(&uc.add(v)?, pot)?;
    let mut g = full.sub(&grad_hamiltonian(uc, pot)?)?;
    g.axpy(-1.0, &hessian_apply(uc, v, pot));
    Ok(apply_j(&g))
}

/// `N₂ = N₁ − J H'(v₁) + J H''(u_c) v₁`.
pub fn forcing_n2(
    uc: &LatticeField,
    v: &LatticeField,
    v1: &LatticeField,
    pot: &Potential,
) -> Result<LatticeField> {
    let mut g = grad_hamiltonian(&uc.add(v)?, pot)?.sub(&grad_hamiltonian(uc, pot)?)?;
    g.axpy(-1.0, &hessian_apply(uc, v, pot));
    g.axpy(-1.0, &grad_hamiltonian(v1, pot)?);
    g.axpy(1.0, &hessian_apply(uc, v1, pot));
    Ok(apply_j(&g))
}

/// Solves the rate system at `state` for the remainder `v = u − u_c(γ)` and
/// its second part `v₂ = v − v₁`.
///
/// Unknowns are `ċ` and `y = (ẋ − c)/c`:
///
/// ```text
/// ċ (h − ⟨v, J⁻¹∂_c u̇⟩)           − y (⟨v, J⁻¹ü⟩ − ⟨u̇, η₁⟩)                          = ⟨N₁, η₁⟩
/// ċ (⟨v₂, J⁻¹∂_c²u⟩ − ⟨∂_c u, η₂⟩) + y (⟨v₂, J⁻¹∂_c u̇⟩ − ⟨u̇, η₂⟩ − ⟨v₂, η₁⟩/c) = −⟨N₂, η₂⟩ + ⟨v₂, η₁⟩/c
/// ```
///
/// with `η₁ = J⁻¹u̇_c`, `η₂ = J⁻¹∂_c u_c`, `h = ⟨∂_c u, η₁⟩ = dH/dc`.
pub fn modulation_rates(
    state: &ModulationState,
    v: &LatticeField,
    v2: &LatticeField,
    family: &dyn WaveFamily,
) -> Result<Rates> {
    let jet = family.jet(state.c, state.x, v.grid())?;
    rates_from_jet(&jet, state.c, v, v2, &family.potential())
}

/// [`modulation_rates`] with a precomputed jet at `(c, x)`.
pub fn rates_from_jet(
    jet: &WaveJet,
    c: f64,
    v: &LatticeField,
    v2: &LatticeField,
    pot: &Potential,
) -> Result<Rates> {
    let v1 = v.sub(v2)?;
    let ud = jet.ud(c);
    let eta1 = apply_j_inverse(&ud);
    let eta2 = apply_j_inverse(&jet.dc);
    let h = inner(&jet.dc, &eta1)?;
    let a11 = inner(&ud, &eta1)?;
    let a12 = inner(&ud, &eta2)?;
    let diag = inner(&jet.dc, &eta2)?;
    let dcud = apply_j_inverse(&jet.dc_ud(c));

    let p = [
        inner(v, &dcud)?,
        inner(v, &apply_j_inverse(&jet.udd(c)))?,
        inner(v2, &apply_j_inverse(&jet.dcc))?,
        inner(v2, &dcud)?,
        inner(v2, &eta1)? / c,
    ];
    let size = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(size < 0.1 * h.abs()) {
        return Err(LabError::DegenerateModulation { perturbation: size, dhdc: h });
    }
    let m = [[h - p[0], a11 - p[1]], [p[2] - diag, p[3] - a12 - p[4]]];
    let b = [
        inner(&forcing_n1(&jet.u, v, pot)?, &eta1)?,
        -inner(&forcing_n2(&jet.u, v, &v1, pot)?, &eta2)? + p[4],
    ];
    let (cdot, y) = solve2(m, b);
    Ok(Rates { cdot, xdot_minus_c: c * y })
}

/// Independent assembly of the same rates from `d/dt F₁ = d/dt F₂ = 0` with
/// the full vector fields `J H'(u)`, `J H'(v₁)`.
pub fn modulation_rates_direct(
    jet: &WaveJet,
    c: f64,
    u: &LatticeField,
    v1: &LatticeField,
    pot: &Potential,
) -> Result<Rates> {
    let ud = jet.ud(c);
    let eta1 = apply_j_inverse(&ud);
    let eta2 = apply_j_inverse(&jet.dc);
    let d = u.sub(&jet.u)?;
    let d2 = d.sub(v1)?;
    let flow_u = apply_j(&grad_hamiltonian(u, pot)?);
    let flow_w = flow_u.sub(&apply_j(&grad_hamiltonian(v1, pot)?))?;
    let m = [
        [
            -inner(&jet.dc, &eta1)? + inner(&d, &apply_j_inverse(&jet.dc_ud(c)))?,
            inner(&jet.dy, &eta1)? + c * inner(&d, &apply_j_inverse(&jet.dyy))?,
        ],
        [
            -inner(&jet.dc, &eta2)? + inner(&d2, &apply_j_inverse(&jet.dcc))?,
            inner(&jet.dy, &eta2)? - inner(&d2, &apply_j_inverse(&jet.dcy))?,
        ],
    ];
    let b = [-inner(&flow_u, &eta1)?, -inner(&flow_w, &eta2)?];
    let (cdot, xdot) = solve2(m, b);
    Ok(Rates { cdot, xdot_minus_c: xdot - c })
}

fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> (f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ((b[0] * m[1][1] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - m[1][0] * b[0]) / det)
}

/// `‖v‖²_{l²} / (|c − c₀| + ‖v₀‖_{l²})`; zero when the denominator is below `1e-14`.
pub fn energy_pin(v: &LatticeField, c: f64, c0: f64, v0_norm: f64) -> f64 {
    let den = (c - c0).abs() + v0_norm;
    if den < 1e-14 {
        0.0
    } else {
        v.norm_l2().powi(2) / den
    }
}
