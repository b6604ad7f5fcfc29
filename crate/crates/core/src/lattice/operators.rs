use super::{Boundary, LatticeField, Potential};
use crate::error::Result;

/// `H(u) = Σ (p²/2 + V(r))` over the window.
pub fn hamiltonian(u: &LatticeField, v: &Potential) -> Result<f64> {
    u.ensure_finite()?;
    Ok(u
        .r()
        .iter()
        .zip(u.p())
        .map(|(&r, &p)| 0.5 * p * p + v.value(r))
        .sum())
}

/// Fréchet derivative `H'(u) = (V'(r), p)`.
pub fn grad_hamiltonian(u: &LatticeField, v: &Potential) -> Result<LatticeField> {
    u.ensure_finite()?;
    Ok(LatticeField::from_parts(
        *u.grid(),
        u.r().iter().map(|&r| v.d1(r)).collect(),
        u.p().to_vec(),
    ))
}

/// `H''(u) w = (V''(r) w_r, w_p)`.
pub fn hessian_apply(u: &LatticeField, w: &LatticeField, v: &Potential) -> LatticeField {
    debug_assert_eq!(u.grid(), w.grid());
    LatticeField::from_parts(
        *u.grid(),
        u.r().iter().zip(w.r()).map(|(&r, &wr)| v.d2(r) * wr).collect(),
        w.p().to_vec(),
    )
}

/// Symplectic operator: `(Jw)_1(n) = w_2(n+1) - w_2(n)`, `(Jw)_2(n) = w_1(n) - w_1(n-1)`.
pub fn apply_j(w: &LatticeField) -> LatticeField {
    let grid = *w.grid();
    let n = grid.len();
    let (wr, wp) = (w.r(), w.p());
    let mut out_r = vec![0.0; n];
    let mut out_p = vec![0.0; n];
    for i in 0..n - 1 {
        out_r[i] = wp[i + 1] - wp[i];
    }
    for i in 1..n {
        out_p[i] = wr[i] - wr[i - 1];
    }
    match grid.boundary {
        Boundary::ZeroPadding => {
            out_r[n - 1] = -wp[n - 1];
            out_p[0] = wr[0];
        }
        Boundary::Periodic => {
            out_r[n - 1] = wp[0] - wp[n - 1];
            out_p[0] = wr[0] - wr[n - 1];
        }
    }
    LatticeField::from_parts(grid, out_r, out_p)
}

/// Left-anchored inverse of [`apply_j`]:
/// `(J⁻¹w)_1(n) = Σ_{m≤n} w_2(m)`, `(J⁻¹w)_2(n) = Σ_{m≤n-1} w_1(m)`,
/// with the sums truncated at `n_min`. Compensated summation, one pass.
///
/// The truncation is only meaningful for inputs that have decayed at the left
/// edge; see [`j_inverse_truncation_unsafe`].
pub fn apply_j_inverse(w: &LatticeField) -> LatticeField {
    let grid = *w.grid();
    let n = grid.len();
    let mut out_r = vec![0.0; n];
    let mut out_p = vec![0.0; n];

    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for (o, &x) in out_r.iter_mut().zip(w.p()) {
        kahan_add(&mut sum, &mut comp, x);
        *o = sum;
    }

    sum = 0.0;
    comp = 0.0;
    for i in 0..n {
        out_p[i] = sum;
        kahan_add(&mut sum, &mut comp, w.r()[i]);
    }
    LatticeField::from_parts(grid, out_r, out_p)
}

/// True when `w` is too large at the window edges for the truncated prefix sums
/// of [`apply_j_inverse`] to be trusted (edge magnitude above `1e-10 max|w|`).
pub fn j_inverse_truncation_unsafe(w: &LatticeField) -> bool {
    let peak = w.norm_sup();
    peak > 0.0 && w.edge_magnitude(2) > 1e-10 * peak
}

#[inline]
fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// `⟨u, w⟩ = Σ (u_1 w_1 + u_2 w_2)`.
pub fn inner(u: &LatticeField, w: &LatticeField) -> Result<f64> {
    u.grid().ensure_same(w.grid())?;
    Ok(super::dot(u, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeGrid;

    fn grid() -> LatticeGrid {
        LatticeGrid::zero_padded(-30, 30).unwrap()
    }

    #[test]
    fn zero_field_has_zero_energy_and_gradient() {
        let u = LatticeField::zeros(grid());
        assert_eq!(hamiltonian(&u, &Potential::Toda).unwrap(), 0.0);
        assert_eq!(grad_hamiltonian(&u, &Potential::Toda).unwrap().norm_sup(), 0.0);
    }

    #[test]
    fn single_site_toda_energy() {
        let u = LatticeField::delta_r(grid(), 0).unwrap();
        let h = hamiltonian(&u, &Potential::Toda).unwrap();
        assert!((h - (-1.0_f64).exp()).abs() < 1e-15);
        let g = grad_hamiltonian(&u, &Potential::Toda).unwrap();
        assert!((g.at(0).0 - (1.0 - (-1.0_f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut u = LatticeField::zeros(grid());
        u.p_mut()[4] = f64::INFINITY;
        assert!(hamiltonian(&u, &Potential::Toda).is_err());
        assert!(grad_hamiltonian(&u, &Potential::Toda).is_err());
    }

    #[test]
    fn j_kills_constants_in_the_interior() {
        let u = LatticeField::from_fn(grid(), |_| (2.0, -3.0)).unwrap();
        let ju = apply_j(&u);
        for n in -29..=29 {
            assert_eq!(ju.at(n), (0.0, 0.0));
        }
        let periodic = LatticeGrid::new(-30, 30, Boundary::Periodic).unwrap();
        let u = LatticeField::from_fn(periodic, |_| (2.0, -3.0)).unwrap();
        assert_eq!(apply_j(&u).norm_sup(), 0.0);
    }

    #[test]
    fn j_of_p_delta() {
        let w = LatticeField::delta_p(grid(), 0).unwrap();
        let jw = apply_j(&w);
        assert_eq!(jw.at(-1).0, 1.0);
        assert_eq!(jw.at(0).0, -1.0);
        assert_eq!(jw.r().iter().filter(|v| **v != 0.0).count(), 2);
        assert_eq!(jw.p().iter().filter(|v| **v != 0.0).count(), 0);
    }

    #[test]
    fn j_inverse_of_p_delta_is_a_step() {
        let w = LatticeField::delta_p(grid(), 0).unwrap();
        let s = apply_j_inverse(&w);
        for n in -30..=30 {
            assert_eq!(s.at(n).0, if n >= 0 { 1.0 } else { 0.0 });
            assert_eq!(s.at(n).1, 0.0);
        }
    }

    #[test]
    fn j_after_j_inverse_is_identity_for_compact_support() {
        let w = LatticeField::from_fn(grid(), |n| {
            if n.abs() <= 10 {
                ((n as f64 * 0.7).sin(), (n as f64 * 1.3).cos())
            } else {
                (0.0, 0.0)
            }
        })
        .unwrap();
        let back = apply_j(&apply_j_inverse(&w));
        let err = back.sub(&w).unwrap().norm_sup();
        assert!(err <= 1e-14, "{err}");
        let back = apply_j_inverse(&apply_j(&w));
        assert!(back.sub(&w).unwrap().norm_sup() <= 1e-14);
    }

    #[test]
    fn j_is_antisymmetric_for_zero_padding() {
        let a = LatticeField::from_fn(grid(), |n| ((n as f64).sin(), (0.3 * n as f64).cos())).unwrap();
        let b = LatticeField::from_fn(grid(), |n| ((0.2 * n as f64).cos(), (n as f64).sin())).unwrap();
        let lhs = inner(&apply_j(&a), &b).unwrap();
        let rhs = -inner(&a, &apply_j(&b)).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn j_inverse_pairing_vanishes_on_range_of_j() {
        // ⟨w, J⁻¹w⟩ equals (Σw₁)(Σw₂); it vanishes when w = Jz for localized z.
        let z = LatticeField::from_fn(grid(), |n| {
            let e = (-(n as f64).powi(2) / 20.0).exp();
            (e * (n as f64).sin(), e)
        })
        .unwrap();
        let w = apply_j(&z);
        assert!(inner(&w, &apply_j_inverse(&w)).unwrap().abs() < 1e-10);

        let bump = LatticeField::from_fn(grid(), |n| {
            let e = (-(n as f64).powi(2) / 8.0).exp();
            (e, 0.5 * e)
        })
        .unwrap();
        let s1: f64 = bump.r().iter().sum();
        let s2: f64 = bump.p().iter().sum();
        let pairing = inner(&bump, &apply_j_inverse(&bump)).unwrap();
        assert!((pairing - s1 * s2).abs() < 1e-12);
    }

    #[test]
    fn inner_checks_grids() {
        let a = LatticeField::zeros(grid());
        let b = LatticeField::zeros(LatticeGrid::zero_padded(-30, 31).unwrap());
        assert!(inner(&a, &b).is_err());
        let d = LatticeField::delta_r(grid(), 0).unwrap();
        assert_eq!(inner(&d, &d).unwrap(), 1.0);
    }

    #[test]
    fn truncation_flag() {
        let w = LatticeField::delta_p(grid(), 0).unwrap();
        assert!(!j_inverse_truncation_unsafe(&w));
        let w = LatticeField::delta_p(grid(), -30).unwrap();
        assert!(j_inverse_truncation_unsafe(&w));
    }

    #[test]
    fn rhs_matches_lattice_equations() {
        let v = Potential::Toda;
        let u = LatticeField::from_fn(grid(), |n| {
            let x = n as f64;
            (0.4 * (0.3 * x).sin() * (-x * x / 100.0).exp(), 0.2 * (0.5 * x).cos() * (-x * x / 80.0).exp())
        })
        .unwrap();
        let rhs = apply_j(&grad_hamiltonian(&u, &v).unwrap());
        for n in -29..=29 {
            let rdot = u.at(n + 1).1 - u.at(n).1;
            let pdot = v.d1(u.at(n).0) - v.d1(u.at(n - 1).0);
            assert!((rhs.at(n).0 - rdot).abs() < 1e-15);
            assert!((rhs.at(n).1 - pdot).abs() < 1e-15);
        }
    }
}
