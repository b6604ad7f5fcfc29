use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{apply_j_inverse, inner, LatticeField, LatticeGrid};
use crate::solitons::{energy_slope, SolitonTangents, WaveFamily, WaveJet};

/// The rank-2 neutral subspace at `(c, x)` and its pairing data.
#[derive(Debug, Clone)]
pub struct NeutralModes {
    pub c: f64,
    pub ud: LatticeField,
    pub uc: LatticeField,
    /// `J⁻¹u̇_c`
    pub eta1: LatticeField,
    /// `J⁻¹∂_c u_c`
    pub eta2: LatticeField,
    /// `G[i][j] = ⟨ξ_i, η_j⟩` with `ξ = (u̇_c, ∂_c u_c)`.
    pub gram: [[f64; 2]; 2],
    pub dhdc: f64,
}

impl NeutralModes {
    pub fn from_tangents(t: &SolitonTangents, c: f64) -> Result<Self> {
        let eta1 = apply_j_inverse(&t.ud);
        let eta2 = apply_j_inverse(&t.uc);
        let gram = [
            [inner(&t.ud, &eta1)?, inner(&t.ud, &eta2)?],
            [inner(&t.uc, &eta1)?, inner(&t.uc, &eta2)?],
        ];
        Ok(Self { c, ud: t.ud.clone(), uc: t.uc.clone(), eta1, eta2, gram, dhdc: t.dhdc })
    }

    pub fn new(family: &dyn WaveFamily, c: f64, x: f64, grid: &LatticeGrid) -> Result<Self> {
        Self::from_tangents(&family.tangents(c, x, grid)?, c)
    }

    /// Biorthogonal projection onto `span{u̇_c, ∂_c u_c}` along the annihilator
    /// of `{J⁻¹u̇_c, J⁻¹∂_c u_c}`: the unique `P v` in the span with
    /// `⟨P v, η_j⟩ = ⟨v, η_j⟩`.
    pub fn project(&self, v: &LatticeField) -> Result<LatticeField> {
        let b = [inner(v, &self.eta1)?, inner(v, &self.eta2)?];
        let g = self.gram;
        // Gᵀ a = b
        let det = g[0][0] * g[1][1] - g[1][0] * g[0][1];
        if det.abs() <= 1e-14 * (g[0][1].abs() + g[1][0].abs()).powi(2) {
            return Err(LabError::DegenerateModulation { perturbation: det, dhdc: self.dhdc });
        }
        let a0 = (g[1][1] * b[0] - g[1][0] * b[1]) / det;
        let a1 = (g[0][0] * b[1] - g[0][1] * b[0]) / det;
        let mut out = self.ud.scaled(a0);
        out.axpy(a1, &self.uc);
        Ok(out)
    }

    /// `θ⟨v, J⁻¹u̇_c⟩ ∂_c u_c − θ⟨v, J⁻¹∂_c u_c⟩ u̇_c`, the closed form that
    /// agrees with [`Self::project`] when `⟨∂_c u_c, J⁻¹∂_c u_c⟩ = 0`.
    pub fn project_formula(&self, v: &LatticeField) -> Result<LatticeField> {
        let theta = 1.0 / self.dhdc;
        let mut out = self.uc.scaled(theta * inner(v, &self.eta1)?);
        out.axpy(-theta * inner(v, &self.eta2)?, &self.ud);
        Ok(out)
    }

    /// `Q v = v − P v`.
    pub fn complement(&self, v: &LatticeField) -> Result<LatticeField> {
        v.sub(&self.project(v)?)
    }
}

/// Projection onto the neutral modes of `tangents` (see [`NeutralModes::project`]).
pub fn project_pc(v: &LatticeField, tangents: &SolitonTangents, c: f64) -> Result<LatticeField> {
    NeutralModes::from_tangents(tangents, c)?.project(v)
}

/// The closed-form rank-2 combination (see [`NeutralModes::project_formula`]).
pub fn project_pc_formula(v: &LatticeField, tangents: &SolitonTangents, c: f64) -> Result<LatticeField> {
    NeutralModes::from_tangents(tangents, c)?.project_formula(v)
}

/// Per-call state of the constraint solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationState {
    pub c: f64,
    pub gamma: f64,
    pub x: f64,
    pub f1: f64,
    pub f2: f64,
    pub iterations: usize,
    /// Jacobian determinant of `(F₁, F₂)` in the `(c, γ)` variables.
    pub jacobian_det: f64,
    pub dhdc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOptions {
    pub max_iter: usize,
    /// Converged when `|F₁| + |F₂| ≤ tol · dH/dc`.
    pub tol: f64,
    /// Largest accepted Newton step in `c` or `γ`.
    pub max_step: f64,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        Self { max_iter: 25, tol: 1e-10, max_step: 0.5 }
    }
}

/// Constraint values and their `(c, x)` Jacobian.
struct Evaluation {
    f: [f64; 2],
    jac: [[f64; 2]; 2],
    dhdc: f64,
}

fn evaluate(
    u: &LatticeField,
    w: &LatticeField,
    family: &dyn WaveFamily,
    c: f64,
    x: f64,
) -> Result<Evaluation> {
    let grid = *u.grid();
    let jet: WaveJet = family.jet(c, x, &grid)?;
    let ud = jet.ud(c);
    let eta1 = apply_j_inverse(&ud);
    let eta2 = apply_j_inverse(&jet.dc);
    let d = u.sub(&jet.u)?;
    let d2 = w.sub(&jet.u)?;
    let f = [inner(&d, &eta1)?, inner(&d2, &eta2)?];
    let dcud = jet.dc_ud(c);
    let jac = [
        [
            -inner(&jet.dc, &eta1)? + inner(&d, &apply_j_inverse(&dcud))?,
            inner(&jet.dy, &eta1)? + c * inner(&d, &apply_j_inverse(&jet.dyy))?,
        ],
        [
            -inner(&jet.dc, &eta2)? + inner(&d2, &apply_j_inverse(&jet.dcc))?,
            inner(&jet.dy, &eta2)? - inner(&d2, &apply_j_inverse(&jet.dcy))?,
        ],
    ];
    let dhdc = energy_slope(&jet, &family.potential());
    Ok(Evaluation { f, jac, dhdc })
}

/// Solves `⟨u − u_c(γ), J⁻¹u̇_c(γ)⟩ = 0`, `⟨(u − v₁) − u_c(γ), J⁻¹∂_c u_c(γ)⟩ = 0`
/// for `(c, γ)` by damped Newton iteration from `(c_init, γ_init)`.
pub fn solve_constraints(
    u: &LatticeField,
    u_minus_v1: &LatticeField,
    c_init: f64,
    gamma_init: f64,
    family: &dyn WaveFamily,
    opts: &ConstraintOptions,
) -> Result<ModulationState> {
    u.grid().ensure_same(u_minus_v1.grid())?;
    let mut c = c_init;
    let mut x = c_init * gamma_init;
    let mut ev = evaluate(u, u_minus_v1, family, c, x)?;
    let norm = |e: &Evaluation| e.f[0].abs() + e.f[1].abs();
    let mut polished = false;
    for it in 0..=opts.max_iter {
        let converged = norm(&ev) <= opts.tol * ev.dhdc.abs();
        if converged && (polished || norm(&ev) == 0.0) {
            let j = ev.jac;
            return Ok(ModulationState {
                c,
                gamma: x / c,
                x,
                f1: ev.f[0],
                f2: ev.f[1],
                iterations: it,
                jacobian_det: c * (j[0][0] * j[1][1] - j[0][1] * j[1][0]),
                dhdc: ev.dhdc,
            });
        }
        if it == opts.max_iter {
            break;
        }
        polished = converged;
        let j = ev.jac;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(LabError::LeftTubularNeighborhood(format!("singular constraint Jacobian at c = {c}")));
        }
        let dc = -(j[1][1] * ev.f[0] - j[0][1] * ev.f[1]) / det;
        let dx = -(j[0][0] * ev.f[1] - j[1][0] * ev.f[0]) / det;
        let dgamma = (x + dx) / (c + dc) - x / c;
        if dc.abs().max(dgamma.abs()) > opts.max_step || !(dc.is_finite() && dx.is_finite()) {
            return Err(LabError::LeftTubularNeighborhood(format!(
                "Newton step (Δc, Δγ) = ({dc:.3e}, {dgamma:.3e}) at iteration {it}"
            )));
        }
        let mut lambda = 1.0;
        let mut next = evaluate(u, u_minus_v1, family, c + dc, x + dx);
        // damp by 0.5 while the residual grows
        while let Ok(ref e) = next {
            if norm(e) <= norm(&ev) || lambda < 1e-3 {
                break;
            }
            lambda *= 0.5;
            next = evaluate(u, u_minus_v1, family, c + lambda * dc, x + lambda * dx);
        }
        ev = next.map_err(|e| match e {
            LabError::SubsonicSpeed { .. } | LabError::CenterTooCloseToBoundary { .. } => {
                LabError::LeftTubularNeighborhood(e.to_string())
            }
            other => other,
        })?;
        c += lambda * dc;
        x += lambda * dx;
    }
    Err(LabError::LeftTubularNeighborhood(format!(
        "no convergence in {} iterations (|F₁| + |F₂| = {:.3e})",
        opts.max_iter,
        norm(&ev)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitons::TodaFamily;

    fn grid() -> LatticeGrid {
        LatticeGrid::zero_padded(-150, 150).unwrap()
    }

    fn bump(grid: LatticeGrid, center: f64, seed: f64) -> LatticeField {
        LatticeField::from_fn(grid, |n| {
            let y = n as f64 - center;
            let e = (-y * y / 18.0).exp();
            (e * (seed * y).sin(), e * (1.0 + 0.3 * (seed * 2.0 * y).cos()))
        })
        .unwrap()
    }

    #[test]
    fn exact_wave_is_recovered_immediately() {
        let fam = TodaFamily;
        let u = fam.sample(1.5, 2.0, &grid()).unwrap();
        let st = solve_constraints(&u, &u, 1.5, 2.0 / 1.5, &fam, &ConstraintOptions::default()).unwrap();
        assert!(st.iterations <= 2);
        assert!((st.c - 1.5).abs() < 1e-12 && (st.x - 2.0).abs() < 1e-12);
        assert!((st.jacobian_det + st.dhdc * st.dhdc).abs() < 1e-8 * st.dhdc * st.dhdc);
    }

    #[test]
    fn warm_start_converges_from_nearby_guess() {
        let fam = TodaFamily;
        let u = fam.sample(1.6, 1.3, &grid()).unwrap();
        let st = solve_constraints(&u, &u, 1.55, 1.0 / 1.55, &fam, &ConstraintOptions::default()).unwrap();
        assert!((st.c - 1.6).abs() < 1e-10 && (st.x - 1.3).abs() < 1e-10);
        assert!(st.f1.abs() <= 1e-9 && st.f2.abs() <= 1e-9);
    }

    #[test]
    fn huge_initial_offsets_leave_the_neighborhood() {
        let fam = TodaFamily;
        let u = fam.sample(1.5, 0.0, &grid()).unwrap();
        let err = solve_constraints(&u, &u, 3.5, 0.0, &fam, &ConstraintOptions::default()).unwrap_err();
        assert!(matches!(err, LabError::LeftTubularNeighborhood(_)), "{err}");
    }

    #[test]
    fn speed_tangent_perturbation_shifts_c_to_first_order() {
        let fam = TodaFamily;
        let (c, x) = (1.5, 1.0);
        let base = fam.sample(c, x, &grid()).unwrap();
        let uc = fam.jet(c, x, &grid()).unwrap().dc;
        let shift = |eps: f64| {
            let u = base.add_scaled(eps, &uc).unwrap();
            let st = solve_constraints(&u, &u, c, x / c, &fam, &ConstraintOptions::default()).unwrap();
            (st.c - c, st.x - x)
        };
        for eps in [1e-4, 1e-3] {
            let (dc, dx) = shift(eps);
            let (dc2, dx2) = shift(0.5 * eps);
            // Richardson: 4 Δ(ε/2) − Δ(ε) removes the O(ε²) term
            let rich = 4.0 * dc2 - dc;
            assert!((rich - eps).abs() < 1e-2 * eps * eps, "eps {eps}: {rich}");
            assert!((dc - eps).abs() < 10.0 * eps * eps, "eps {eps}: {dc}");
            // the center, hence γ = x/c at fixed c, moves only at second order
            assert!(dx.abs() < 10.0 * eps * eps && dx2.abs() < 10.0 * eps * eps, "eps {eps}: {dx}");
        }
    }

    #[test]
    fn far_field_noise_barely_moves_the_parameters() {
        let fam = TodaFamily;
        let g = LatticeGrid::zero_padded(-150, 300).unwrap();
        let (c, x) = (1.5, 0.0);
        let kappa = fam.decay_rate(c).unwrap();
        let start = (x + 80.0 / kappa).ceil() as i64;
        let mut noise = LatticeField::from_fn(g, |n| {
            if n >= start && n < start + 60 {
                ((0.37 * n as f64).sin(), (1.3 * n as f64).cos())
            } else {
                (0.0, 0.0)
            }
        })
        .unwrap();
        noise = noise.scaled(1e-3 / noise.norm_l2());
        let clean = fam.sample(c, x, &g).unwrap();
        let u = clean.add(&noise).unwrap();
        let st = solve_constraints(&u, &clean, c, x / c, &fam, &ConstraintOptions::default()).unwrap();
        assert!((st.c - c).abs() < 1e-8 && (st.x - x).abs() < 1e-8, "{st:?}");
    }

    #[test]
    fn projection_is_idempotent_and_fixes_the_modes() {
        let fam = TodaFamily;
        let m = NeutralModes::new(&fam, 1.5, 0.0, &grid()).unwrap();
        for (k, mode) in [&m.ud, &m.uc].into_iter().enumerate() {
            let err = m.project(mode).unwrap().sub(mode).unwrap().norm_sup();
            assert!(err < 1e-10 * mode.norm_sup(), "mode {k}: {err}");
        }
        assert_eq!(m.project(&LatticeField::zeros(grid())).unwrap().norm_sup(), 0.0);
        for s in 0..5 {
            let v = bump(grid(), s as f64 - 2.0, 0.3 + 0.1 * s as f64);
            let p = m.project(&v).unwrap();
            let pp = m.project(&p).unwrap();
            assert!(pp.sub(&p).unwrap().norm_sup() < 1e-8 * p.norm_sup().max(1.0));
            let q = m.complement(&v).unwrap();
            assert!(m.project(&q).unwrap().norm_sup() < 1e-8 * v.norm_sup());
        }
    }

    #[test]
    fn formula_projection_agrees_only_when_the_diagonal_pairing_vanishes() {
        let fam = TodaFamily;
        let m = NeutralModes::new(&fam, 1.5, 0.0, &grid()).unwrap();
        // the u̇ diagonal vanishes, the ∂_c u diagonal does not
        assert!(m.gram[0][0].abs() < 1e-10);
        assert!(m.gram[1][1].abs() > 1.0);
        let v = bump(grid(), 0.0, 0.4);
        let a = m.project(&v).unwrap();
        let b = m.project_formula(&v).unwrap();
        assert!(a.sub(&b).unwrap().norm_sup() > 1e-6);
        let mut flat = m.clone();
        flat.gram[1][1] = 0.0;
        let c = flat.project(&v).unwrap();
        assert!(c.sub(&b).unwrap().norm_sup() < 1e-6 * b.norm_sup());
    }
}
