use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_dual::Dual2_64;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{solve_kappa, SolitonTangents, WaveFamily, WaveJet};
use crate::error::{LabError, Result};
use crate::lattice::{hamiltonian, LatticeField, LatticeGrid, Potential};

const EDGE_MARGIN: f64 = 25.0;

/// `√V''(0)`; only defined for the FPU family.
pub fn fpu_sound_speed(v: &Potential) -> Result<f64> {
    match v {
        Potential::Fpu { .. } => {
            v.validate()?;
            Ok(v.sound_speed())
        }
        Potential::Toda => Err(LabError::InvalidPotential(
            "sound speed query is for FPU potentials; Toda uses c_s = 1".into(),
        )),
    }
}

fn coefficients(v: &Potential) -> Result<(f64, f64, f64)> {
    match *v {
        Potential::Fpu { k2, k3, k4 } => {
            v.validate()?;
            Ok((k2, k3, k4))
        }
        Potential::Toda => Err(LabError::InvalidPotential("expected an FPU potential".into())),
    }
}

/// Periodic spectral grid `x_j = j h` (wrapped), `h = L/N`.
#[derive(Clone)]
struct Spectral {
    n: usize,
    period: f64,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("period", &self.period).finish()
    }
}

impl Spectral {
    fn new(period: f64, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / period
            })
            .collect();
        Self { n, period, k, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn h(&self) -> f64 {
        self.period / self.n as f64
    }

    fn x(&self, j: usize) -> f64 {
        let j = if j < self.n / 2 { j as f64 } else { j as f64 - self.n as f64 };
        j * self.h()
    }

    fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, xh: &[Complex64]) -> Vec<f64> {
        let mut buf = xh.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|z| z.re * s).collect()
    }

    /// `(ik)^order`, with the unpaired Nyquist mode dropped for odd orders.
    fn deriv_factor(&self, j: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && self.n.is_multiple_of(2) && j == self.n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.k[j]).powu(order)
    }

    /// Trigonometric interpolation onto a grid `factor` times finer.
    fn refine(&self, xh: &[Complex64], factor: usize) -> (Spectral, Vec<Complex64>) {
        let fine = Spectral::new(self.period, self.n * factor);
        let mut out = vec![Complex64::new(0.0, 0.0); fine.n];
        let half = self.n / 2;
        let scale = factor as f64;
        for j in 0..self.n {
            let z = xh[j] * scale;
            if self.n.is_multiple_of(2) && j == half {
                out[half] += 0.5 * z;
                out[fine.n - half] += 0.5 * z;
            } else if j < half {
                out[j] = z;
            } else {
                out[fine.n - (self.n - j)] = z;
            }
        }
        (fine, out)
    }
}

/// Operator symbols of `c² r'' = ΔV'(r)` written as `L r̂ = M N̂(r)`.
struct Symbols {
    l: Vec<f64>,
    m: Vec<f64>,
    /// `M/L`, with the `k → 0` limit `1/(c² − k₂)`
    kinv: Vec<f64>,
}

impl Symbols {
    fn new(sp: &Spectral, c: f64, k2: f64) -> Self {
        let mut l = Vec::with_capacity(sp.n);
        let mut m = Vec::with_capacity(sp.n);
        let mut kinv = Vec::with_capacity(sp.n);
        for &k in &sp.k {
            let s = (0.5 * k).sin();
            let mm = 4.0 * s * s;
            let ll = c * c * k * k - k2 * mm;
            l.push(ll);
            m.push(mm);
            kinv.push(if k == 0.0 { 1.0 / (c * c - k2) } else { mm / ll });
        }
        Self { l, m, kinv }
    }
}

fn nonlinear(r: f64, k3: f64, k4: f64) -> f64 {
    r * r * (3.0 * k3 + 4.0 * k4 * r)
}

fn nonlinear_d(r: f64, k3: f64, k4: f64) -> f64 {
    r * (6.0 * k3 + 12.0 * k4 * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpuSolverOptions {
    pub max_iter: usize,
    /// Relative sup-norm change at which the fixed-point stage stops.
    pub tol: f64,
    pub newton_steps: usize,
    /// Accepted collocation defect.
    pub residual_tol: f64,
}

impl Default for FpuSolverOptions {
    fn default() -> Self {
        Self { max_iter: 3000, tol: 1e-13, newton_steps: 3, residual_tol: 1e-8 }
    }
}

/// Solitary-wave profile of an FPU lattice, stored as Fourier coefficients of
/// `r̃` and `p̃` on a periodic box centered at the wave.
#[derive(Debug, Clone)]
pub struct FpuSoliton {
    pub potential: Potential,
    pub c: f64,
    pub period: f64,
    pub points: usize,
    /// Sup-norm collocation defect of the advance–delay equation.
    pub residual: f64,
    pub iterations: usize,
    sp: Spectral,
    r_hat: Vec<Complex64>,
    p_hat: Vec<Complex64>,
}

/// Box length used when none is given: `40/√(c² − c_s²)` rounded up to a
/// multiple of 8 sites.
pub fn default_period(v: &Potential, c: f64) -> Result<f64> {
    let cs = fpu_sound_speed(v)?;
    if !(c > cs) {
        return Err(LabError::SubsonicSpeed { c, sound_speed: cs });
    }
    Ok((40.0 / (c * c - cs * cs).sqrt() / 8.0).ceil() * 8.0)
}

pub fn solve_fpu_profile(v: &Potential, c: f64, period: f64, n_colloc: usize) -> Result<FpuSoliton> {
    solve_fpu_profile_with(v, c, period, n_colloc, &FpuSolverOptions::default())
}

pub fn solve_fpu_profile_with(
    v: &Potential,
    c: f64,
    period: f64,
    n_colloc: usize,
    opts: &FpuSolverOptions,
) -> Result<FpuSoliton> {
    let (k2, k3, k4) = coefficients(v)?;
    let cs = k2.sqrt();
    if !(c > cs) || !c.is_finite() {
        return Err(LabError::SubsonicSpeed { c, sound_speed: cs });
    }
    if c > 1.1 * cs {
        log::warn!("c = {c} is outside the small-amplitude regime (c ≤ 1.1 c_s)");
    }
    if !(period > 0.0) || n_colloc < 16 || !n_colloc.is_multiple_of(2) {
        return Err(LabError::InvalidArgument(format!(
            "collocation needs period > 0 and an even N ≥ 16 (got L = {period}, N = {n_colloc})"
        )));
    }
    let sp = Spectral::new(period, n_colloc);
    let sym = Symbols::new(&sp, c, k2);
    let n = sp.n;

    // long-wave initializer r = A sech²(Bx)
    let eps = c * c - k2;
    let amp = eps / (2.0 * k3);
    let width = (3.0 * eps / k2).sqrt();
    let mut r: Vec<f64> = (0..n).map(|j| amp / (width * sp.x(j)).cosh().powi(2)).collect();

    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let rh = sp.forward(&r);
        let nl: Vec<f64> = r.iter().map(|&x| nonlinear(x, k3, k4)).collect();
        let nh = sp.forward(&nl);
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            num += sym.l[j] * rh[j].norm_sqr();
            den += sym.m[j] * (rh[j].conj() * nh[j]).re;
        }
        let s = num / den;
        if !s.is_finite() || s <= 0.0 {
            return Err(LabError::NotSolitaryWave(format!("stabilizing factor {s} at iteration {it}")));
        }
        let s2 = s * s;
        // real coefficients keep the iterate exactly even
        let next_h: Vec<Complex64> =
            (0..n).map(|j| Complex64::new(s2 * sym.kinv[j] * nh[j].re, 0.0)).collect();
        let next = sp.inverse(&next_h);
        let peak = next.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let change = next.iter().zip(&r).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        r = next;
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(LabError::NotSolitaryWave("iteration collapsed".into()));
        }
        if change <= opts.tol * peak && (s - 1.0).abs() <= 1e-10 {
            converged = true;
            break;
        }
    }

    for _ in 0..opts.newton_steps {
        let step = newton_step(&sp, &sym, &r, k3, k4)?;
        for j in 0..n {
            r[j] += step[j];
        }
    }

    let r_hat = sp.forward(&r);
    let residual = defect(&sp, &sym, &r_hat, k3, k4).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(residual <= opts.residual_tol) {
        return Err(LabError::NoConvergence { iterations, residual });
    }
    if !converged {
        log::debug!("fixed-point stage stopped at {iterations} iterations; Newton polish reached {residual:e}");
    }

    let w: Vec<f64> = r.iter().map(|&x| v.d1(x)).collect();
    let wh = sp.forward(&w);
    let p_hat: Vec<Complex64> = (0..n)
        .map(|j| {
            let k = sp.k[j];
            if k == 0.0 {
                -wh[j] / c
            } else {
                let e = Complex64::new(0.0, -k).exp();
                -(Complex64::new(1.0, 0.0) - e) / Complex64::new(0.0, c * k) * wh[j]
            }
        })
        .collect();

    let sol = FpuSoliton {
        potential: *v,
        c,
        period,
        points: n,
        residual,
        iterations,
        sp,
        r_hat,
        p_hat,
    };
    sol.check_shape()?;
    Ok(sol)
}

/// `c² r'' − (V'(r)(x+1) − 2V'(r)(x) + V'(r)(x−1))` at the collocation points.
fn defect(sp: &Spectral, sym: &Symbols, r_hat: &[Complex64], k3: f64, k4: f64) -> Vec<f64> {
    let r = sp.inverse(r_hat);
    let nl: Vec<f64> = r.iter().map(|&x| nonlinear(x, k3, k4)).collect();
    let nh = sp.forward(&nl);
    let d: Vec<Complex64> = (0..sp.n).map(|j| -sym.l[j] * r_hat[j] + sym.m[j] * nh[j]).collect();
    sp.inverse(&d)
}

/// Newton correction for `r − K N(r) = 0` restricted to even fields.
fn newton_step(sp: &Spectral, sym: &Symbols, r: &[f64], k3: f64, k4: f64) -> Result<Vec<f64>> {
    let n = sp.n;
    let half = n / 2;
    let dim = half + 1;
    let apply_k = |f: &[f64]| -> Vec<f64> {
        let fh = sp.forward(f);
        let g: Vec<Complex64> = (0..n).map(|j| fh[j] * sym.kinv[j]).collect();
        sp.inverse(&g)
    };
    let nl: Vec<f64> = r.iter().map(|&x| nonlinear(x, k3, k4)).collect();
    let knl = apply_k(&nl);
    let g = DVector::from_iterator(dim, (0..dim).map(|j| r[j] - knl[j]));
    let dn: Vec<f64> = r.iter().map(|&x| nonlinear_d(x, k3, k4)).collect();

    let cols: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|m| {
            let mut e = vec![0.0; n];
            e[m] = dn[m];
            e[(n - m) % n] = dn[m];
            let ke = apply_k(&e);
            (0..dim)
                .map(|j| {
                    let id = if j == m { 1.0 } else { 0.0 };
                    id - ke[j]
                })
                .collect()
        })
        .collect();
    let jac = DMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
    let delta = jac
        .lu()
        .solve(&(-g))
        .ok_or(LabError::NoConvergence { iterations: 0, residual: f64::NAN })?;
    Ok((0..n).map(|j| delta[if j <= half { j } else { n - j }]).collect())
}

impl FpuSoliton {
    pub fn sound_speed(&self) -> f64 {
        self.potential.sound_speed()
    }

    /// Tail exponent `μ/2`, where `c² μ² = 4 k₂ sinh²(μ/2)`.
    pub fn decay_rate(&self) -> Result<f64> {
        fpu_decay_rate(&self.potential, self.c)
    }

    pub fn spacing(&self) -> f64 {
        self.sp.h()
    }

    /// Collocation abscissae in increasing order over `[−L/2, L/2)`.
    pub fn abscissae(&self) -> Vec<f64> {
        self.ordered(|j| self.sp.x(j))
    }

    /// `r̃` at [`Self::abscissae`].
    pub fn profile_r(&self) -> Vec<f64> {
        let r = self.sp.inverse(&self.r_hat);
        self.ordered(|j| r[j])
    }

    /// `p̃` at [`Self::abscissae`].
    pub fn profile_p(&self) -> Vec<f64> {
        let p = self.sp.inverse(&self.p_hat);
        self.ordered(|j| p[j])
    }

    fn ordered<F: Fn(usize) -> f64>(&self, f: F) -> Vec<f64> {
        let n = self.points;
        (n / 2..n).chain(0..n / 2).map(f).collect()
    }

    /// Signed extremum of `r̃` (at the origin).
    pub fn amplitude(&self) -> f64 {
        self.profile_r().into_iter().fold(0.0, |m, x| if x.abs() > m.abs() { x } else { m })
    }

    /// `max |r̃(x) − r̃(−x)|` over collocation points.
    pub fn symmetry_error(&self) -> f64 {
        let r = self.sp.inverse(&self.r_hat);
        let n = self.points;
        (1..n).fold(0.0_f64, |m, j| m.max((r[j] - r[n - j]).abs()))
    }

    /// First moment `Σ x r̃ / Σ r̃`.
    pub fn centroid(&self) -> f64 {
        let x = self.abscissae();
        let r = self.profile_r();
        let num: f64 = x.iter().zip(&r).map(|(a, b)| a * b).sum();
        num / r.iter().sum::<f64>()
    }

    /// Defect evaluated on a grid `factor` times finer than the collocation grid.
    pub fn refined_defect(&self, factor: usize) -> Result<f64> {
        let (_, k3, k4) = coefficients(&self.potential)?;
        let (fine, rh) = self.sp.refine(&self.r_hat, factor);
        let sym = Symbols::new(&fine, self.c, self.potential.d2(0.0));
        Ok(defect(&fine, &sym, &rh, k3, k4).iter().fold(0.0_f64, |m, x| m.max(x.abs())))
    }

    fn check_shape(&self) -> Result<()> {
        let r = self.profile_r();
        let amp = self.amplitude();
        let n = r.len();
        let edge = r[0].abs().max(r[n - 1].abs());
        if edge > 1e-9 * amp.abs() {
            return Err(LabError::NotSolitaryWave(format!(
                "profile has not decayed at the box edge ({edge:e} vs peak {amp:e})"
            )));
        }
        if r.iter().any(|&x| x * amp < 0.0 && x.abs() > 1e-10 * amp.abs()) {
            return Err(LabError::NotSolitaryWave("profile changes sign".into()));
        }
        Ok(())
    }

    fn sites_per_point(&self) -> Result<usize> {
        sites_per_point(&self.sp)
    }

    /// Samples `r(n) = r̃(n − x₀)`, `p(n) = p̃(n − x₀)`.
    pub fn sample(&self, grid: &LatticeGrid, x0: f64) -> Result<LatticeField> {
        self.check_center(grid, x0)?;
        let pps = self.sites_per_point()?;
        Ok(LatticeField::from_parts(
            *grid,
            sample_spectrum(&self.sp, pps, &self.r_hat, 0, grid, x0),
            sample_spectrum(&self.sp, pps, &self.p_hat, 0, grid, x0),
        ))
    }

    /// `∂_y^order` of the profile sampled at `n − x₀`.
    pub fn sample_derivative(&self, order: u32, grid: &LatticeGrid, x0: f64) -> Result<LatticeField> {
        let pps = self.sites_per_point()?;
        Ok(LatticeField::from_parts(
            *grid,
            sample_spectrum(&self.sp, pps, &self.r_hat, order, grid, x0),
            sample_spectrum(&self.sp, pps, &self.p_hat, order, grid, x0),
        ))
    }

    fn check_center(&self, grid: &LatticeGrid, x0: f64) -> Result<()> {
        let margin = EDGE_MARGIN / self.decay_rate()?;
        if grid.edge_distance(x0) < margin {
            return Err(LabError::CenterTooCloseToBoundary { center: x0, margin });
        }
        Ok(())
    }

    /// Lattice energy of the sampled wave at phase 0.
    pub fn energy(&self) -> Result<f64> {
        let half = (self.period / 2.0).floor() as i64;
        let grid = LatticeGrid::zero_padded(-half, half)?;
        let pps = self.sites_per_point()?;
        let u = LatticeField::from_parts(
            grid,
            sample_spectrum(&self.sp, pps, &self.r_hat, 0, &grid, 0.0),
            sample_spectrum(&self.sp, pps, &self.p_hat, 0, &grid, 0.0),
        );
        hamiltonian(&u, &self.potential)
    }
}

pub(crate) fn fpu_decay_rate(v: &Potential, c: f64) -> Result<f64> {
    let cs = v.sound_speed();
    solve_kappa(c / cs).map_err(|_| LabError::SubsonicSpeed { c, sound_speed: cs })
}

fn sites_per_point(sp: &Spectral) -> Result<usize> {
    let pps = sp.n as f64 / sp.period;
    if (pps - pps.round()).abs() > 1e-9 || pps.round() < 1.0 || (sp.period - sp.period.round()).abs() > 1e-9 {
        return Err(LabError::InvalidArgument(format!(
            "lattice sampling needs an integer box length and an integer number of points per site (L = {}, N = {})",
            sp.period, sp.n
        )));
    }
    Ok(pps.round() as usize)
}

/// Evaluates `∂_y^order f(n − x₀)` on a lattice from the coefficients of `f`.
/// Sites outside the collocation box get zero.
fn sample_spectrum(
    sp: &Spectral,
    pps: usize,
    coeffs: &[Complex64],
    order: u32,
    grid: &LatticeGrid,
    x0: f64,
) -> Vec<f64> {
    let base = x0.floor();
    let phi = x0 - base;
    let shifted: Vec<Complex64> = (0..sp.n)
        .map(|j| coeffs[j] * sp.deriv_factor(j, order) * Complex64::new(0.0, -sp.k[j] * phi).exp())
        .collect();
    let vals = sp.inverse(&shifted);
    let half = (sp.period / 2.0).round() as i64;
    grid.sites()
        .map(|n| {
            let m = n - base as i64;
            if m < -half || m >= half {
                0.0
            } else {
                vals[(m.rem_euclid(sp.period.round() as i64) as usize) * pps]
            }
        })
        .collect()
}

/// Tangent fields of an FPU wave by centered differences in `c`, following the
/// profile at `c ± h` with `h = 10⁻³ (c − c_s)`.
pub fn fpu_tangents(s: &FpuSoliton, grid: &LatticeGrid, x0: f64) -> Result<SolitonTangents> {
    let h = 1e-3 * (s.c - s.sound_speed());
    let plus = solve_fpu_profile(&s.potential, s.c + h, s.period, s.points)?;
    let minus = solve_fpu_profile(&s.potential, s.c - h, s.period, s.points)?;
    for prof in [&plus, s, &minus] {
        let drift = prof.centroid();
        if drift.abs() > 0.1 {
            return Err(LabError::AlignmentFailure(drift));
        }
    }
    let up = plus.sample(grid, x0)?;
    let um = minus.sample(grid, x0)?;
    let uc = up.sub(&um)?.scaled(0.5 / h);
    let ud = s.sample_derivative(1, grid, x0)?.scaled(-s.c);
    let dhdc = (hamiltonian(&up, &s.potential)? - hamiltonian(&um, &s.potential)?) / (2.0 * h);
    Ok(SolitonTangents { ud, uc, dhdc, theta: 1.0 / dhdc })
}

/// FPU solitary waves on a speed interval, interpolated in `c` by a polynomial
/// through Chebyshev nodes so that `∂_c` and `∂_c²` are available to the
/// modulation solver.
#[derive(Debug, Clone)]
pub struct FpuFamily {
    potential: Potential,
    nodes: Vec<f64>,
    sp: Spectral,
    r_hats: Vec<Vec<Complex64>>,
    p_hats: Vec<Vec<Complex64>>,
    pub max_residual: f64,
}

impl FpuFamily {
    pub fn new(v: &Potential, c_lo: f64, c_hi: f64, n_nodes: usize) -> Result<Self> {
        let cs = fpu_sound_speed(v)?;
        if !(c_lo > cs && c_hi > c_lo) || n_nodes < 3 {
            return Err(LabError::InvalidArgument(format!(
                "family interval must satisfy c_s < c_lo < c_hi with ≥ 3 nodes (got [{c_lo}, {c_hi}], {n_nodes})"
            )));
        }
        let period = default_period(v, c_lo)?;
        let points = (period as usize) * 4;
        let nodes: Vec<f64> = (0..n_nodes)
            .map(|j| {
                let t = ((2 * j + 1) as f64 * PI / (2 * n_nodes) as f64).cos();
                0.5 * (c_lo + c_hi) + 0.5 * (c_hi - c_lo) * t
            })
            .collect();
        let sols: Vec<FpuSoliton> = nodes
            .par_iter()
            .map(|&c| solve_fpu_profile(v, c, period, points))
            .collect::<Result<_>>()?;
        let max_residual = sols.iter().fold(0.0_f64, |m, s| m.max(s.residual));
        Ok(Self {
            potential: *v,
            nodes,
            sp: sols[0].sp.clone(),
            r_hats: sols.iter().map(|s| s.r_hat.clone()).collect(),
            p_hats: sols.iter().map(|s| s.p_hat.clone()).collect(),
            max_residual,
        })
    }

    /// Family on `[c₀ − w, c₀ + w]` with `w = (c₀ − c_s)/4`.
    ///
    /// The profile is analytic in `c` except at `c_s`, so the interval is kept
    /// well away from it for fast polynomial convergence.
    pub fn around(v: &Potential, c0: f64) -> Result<Self> {
        let cs = fpu_sound_speed(v)?;
        let w = 0.25 * (c0 - cs);
        Self::new(v, c0 - w, c0 + w, 13)
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Lagrange weights and their first two `c`-derivatives.
    fn weights(&self, c: f64) -> Result<Vec<(f64, f64, f64)>> {
        let (lo, hi) = self.range();
        let pad = 0.25 * (hi - lo);
        if c < lo - pad || c > hi + pad {
            return Err(LabError::InvalidArgument(format!(
                "speed {c} outside the interpolated family [{lo}, {hi}]"
            )));
        }
        let cd = Dual2_64::new(c, 1.0, 0.0);
        Ok((0..self.nodes.len())
            .map(|j| {
                let mut l = Dual2_64::from(1.0);
                for (m, &cm) in self.nodes.iter().enumerate() {
                    if m != j {
                        l = l * (cd - cm) / (self.nodes[j] - cm);
                    }
                }
                (l.re, l.v1, l.v2)
            })
            .collect())
    }

    fn combine(&self, tables: &[Vec<Complex64>], w: &[(f64, f64, f64)], which: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.sp.n];
        for (t, wj) in tables.iter().zip(w) {
            let f = [wj.0, wj.1, wj.2][which];
            for (o, z) in out.iter_mut().zip(t) {
                *o += z * f;
            }
        }
        out
    }

    fn check_center(&self, c: f64, grid: &LatticeGrid, x: f64) -> Result<()> {
        let margin = EDGE_MARGIN / fpu_decay_rate(&self.potential, c)?;
        if grid.edge_distance(x) < margin {
            return Err(LabError::CenterTooCloseToBoundary { center: x, margin });
        }
        Ok(())
    }

    fn field(&self, rh: &[Complex64], ph: &[Complex64], order: u32, grid: &LatticeGrid, x: f64) -> Result<LatticeField> {
        let pps = sites_per_point(&self.sp)?;
        Ok(LatticeField::from_parts(
            *grid,
            sample_spectrum(&self.sp, pps, rh, order, grid, x),
            sample_spectrum(&self.sp, pps, ph, order, grid, x),
        ))
    }
}

impl WaveFamily for FpuFamily {
    fn potential(&self) -> Potential {
        self.potential
    }

    fn sound_speed(&self) -> f64 {
        self.potential.sound_speed()
    }

    fn decay_rate(&self, c: f64) -> Result<f64> {
        fpu_decay_rate(&self.potential, c)
    }

    fn sample(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<LatticeField> {
        self.check_center(c, grid, x)?;
        let w = self.weights(c)?;
        let rh = self.combine(&self.r_hats, &w, 0);
        let ph = self.combine(&self.p_hats, &w, 0);
        self.field(&rh, &ph, 0, grid, x)
    }

    fn jet(&self, c: f64, x: f64, grid: &LatticeGrid) -> Result<WaveJet> {
        self.check_center(c, grid, x)?;
        let w = self.weights(c)?;
        let spectra: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..3)
            .map(|which| (self.combine(&self.r_hats, &w, which), self.combine(&self.p_hats, &w, which)))
            .collect();
        let (r0, p0) = &spectra[0];
        let (r1, p1) = &spectra[1];
        let (r2, p2) = &spectra[2];
        Ok(WaveJet {
            u: self.field(r0, p0, 0, grid, x)?,
            dy: self.field(r0, p0, 1, grid, x)?,
            dyy: self.field(r0, p0, 2, grid, x)?,
            dc: self.field(r1, p1, 0, grid, x)?,
            dcy: self.field(r1, p1, 1, grid, x)?,
            dcc: self.field(r2, p2, 0, grid, x)?,
        })
    }
}
