//! Finite-window lattice fields.
//!
//! A field `u = (r, p)` lives on the integer sites `n_min..=n_max`; `r(n)` is the
//! relative displacement `q(n+1) - q(n)` and `p(n)` the velocity of particle `n`.
//! Sites outside the window are treated according to [`Boundary`].

mod io;
mod norms;
mod operators;
mod potential;

pub use io::{read_snapshot_csv, write_snapshot_csv};
pub use norms::{weighted_norm, weighted_norm_centered, CenterPath, NormKind, WeightSpec};
pub use operators::{
    apply_j, apply_j_inverse, grad_hamiltonian, hamiltonian, hessian_apply, inner,
    j_inverse_truncation_unsafe,
};
pub use potential::Potential;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum number of sites beyond `n_min` a grid must span.
pub const MIN_GRID_SPAN: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Values outside the window are zero (clamped chain ends).
    #[default]
    ZeroPadding,
    Periodic,
}

/// Integer window `n_min..=n_max` together with its boundary rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGrid {
    pub n_min: i64,
    pub n_max: i64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeGrid {
    pub fn new(n_min: i64, n_max: i64, boundary: Boundary) -> Result<Self> {
        let grid = Self {
            n_min,
            n_max,
            boundary,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn zero_padded(n_min: i64, n_max: i64) -> Result<Self> {
        Self::new(n_min, n_max, Boundary::ZeroPadding)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max - self.n_min < MIN_GRID_SPAN {
            return Err(LabError::InvalidGrid(format!(
                "window [{}, {}] spans fewer than {} sites",
                self.n_min, self.n_max, MIN_GRID_SPAN
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Site index of storage slot `i`.
    #[inline]
    pub fn site(&self, i: usize) -> i64 {
        self.n_min + i as i64
    }

    /// Storage slot of site `n`, if inside the window.
    #[inline]
    pub fn slot(&self, n: i64) -> Option<usize> {
        if n < self.n_min || n > self.n_max {
            None
        } else {
            Some((n - self.n_min) as usize)
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// Distance from `x` to the nearer window edge.
    pub fn edge_distance(&self, x: f64) -> f64 {
        (x - self.n_min as f64).min(self.n_max as f64 - x)
    }

    pub(crate) fn ensure_same(&self, other: &LatticeGrid) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!(
                "[{}, {}] {:?} vs [{}, {}] {:?}",
                self.n_min, self.n_max, self.boundary, other.n_min, other.n_max, other.boundary
            )));
        }
        Ok(())
    }
}

/// Paired sequences `(r, p)` on a [`LatticeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: LatticeGrid,
    r: Vec<f64>,
    p: Vec<f64>,
}

impl LatticeField {
    pub fn new(grid: LatticeGrid, r: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if r.len() != grid.len() || p.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "expected {} entries per component, got r: {}, p: {}",
                grid.len(),
                r.len(),
                p.len()
            )));
        }
        let field = Self { grid, r, p };
        field.ensure_finite()?;
        Ok(field)
    }

    /// Builds a field without the finiteness scan; lengths must match the grid.
    pub(crate) fn from_parts(grid: LatticeGrid, r: Vec<f64>, p: Vec<f64>) -> Self {
        debug_assert_eq!(r.len(), grid.len());
        debug_assert_eq!(p.len(), grid.len());
        Self { grid, r, p }
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        let n = grid.len();
        Self::from_parts(grid, vec![0.0; n], vec![0.0; n])
    }

    /// Evaluates `f(n) = (r, p)` at every site.
    pub fn from_fn(grid: LatticeGrid, mut f: impl FnMut(i64) -> (f64, f64)) -> Result<Self> {
        let (r, p): (Vec<f64>, Vec<f64>) = grid.sites().map(&mut f).unzip();
        Self::new(grid, r, p)
    }

    /// Unit impulse in the `r` component at site `n`.
    pub fn delta_r(grid: LatticeGrid, n: i64) -> Result<Self> {
        let mut u = Self::zeros(grid);
        let i = grid
            .slot(n)
            .ok_or_else(|| LabError::InvalidArgument(format!("site {n} outside window")))?;
        u.r[i] = 1.0;
        Ok(u)
    }

    /// Unit impulse in the `p` component at site `n`.
    pub fn delta_p(grid: LatticeGrid, n: i64) -> Result<Self> {
        let mut u = Self::zeros(grid);
        let i = grid
            .slot(n)
            .ok_or_else(|| LabError::InvalidArgument(format!("site {n} outside window")))?;
        u.p[i] = 1.0;
        Ok(u)
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn r_mut(&mut self) -> &mut [f64] {
        &mut self.r
    }

    pub fn p_mut(&mut self) -> &mut [f64] {
        &mut self.p
    }

    /// Both components mutably at once.
    pub fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.r, &mut self.p)
    }

    pub fn into_parts(self) -> (LatticeGrid, Vec<f64>, Vec<f64>) {
        (self.grid, self.r, self.p)
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LabError::NonFinite)
        }
    }

    /// `(r(n), p(n))` at site `n`, honoring the boundary rule outside the window.
    pub fn at(&self, n: i64) -> (f64, f64) {
        match self.grid.slot(n) {
            Some(i) => (self.r[i], self.p[i]),
            None => match self.grid.boundary {
                Boundary::ZeroPadding => (0.0, 0.0),
                Boundary::Periodic => {
                    let len = self.grid.len() as i64;
                    let i = (n - self.grid.n_min).rem_euclid(len) as usize;
                    (self.r[i], self.p[i])
                }
            },
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.grid,
            self.r.iter().map(|v| v * factor).collect(),
            self.p.iter().map(|v| v * factor).collect(),
        )
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &LatticeField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        out.axpy(alpha, other);
        Ok(out)
    }

    pub fn sub(&self, other: &LatticeField) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn add(&self, other: &LatticeField) -> Result<Self> {
        self.add_scaled(1.0, other)
    }

    /// In-place `self += alpha * other`; grids must agree.
    pub fn axpy(&mut self, alpha: f64, other: &LatticeField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.r.iter_mut().zip(&other.r) {
            *a += alpha * b;
        }
        for (a, b) in self.p.iter_mut().zip(&other.p) {
            *a += alpha * b;
        }
    }

    pub fn norm_l2(&self) -> f64 {
        self.r
            .iter()
            .chain(&self.p)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.r
            .iter()
            .chain(&self.p)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Integer translation: the result at site `n` is `self` at `n - k`.
    pub fn shifted(&self, k: i64) -> Self {
        let n = self.grid.len();
        let mut r = vec![0.0; n];
        let mut p = vec![0.0; n];
        for (i, (ri, pi)) in r.iter_mut().zip(p.iter_mut()).enumerate() {
            let (a, b) = self.at(self.grid.site(i) - k);
            *ri = a;
            *pi = b;
        }
        Self::from_parts(self.grid, r, p)
    }

    /// Positions `q(n)` with the gauge `q(n_min) = 0`; one more entry than sites.
    pub fn reconstruct_q(&self) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.r.len() + 1);
        let mut acc = 0.0;
        q.push(acc);
        for r in &self.r {
            acc += r;
            q.push(acc);
        }
        q
    }

    /// Largest `|u(n)|` over the `k` outermost sites at either end.
    pub fn edge_magnitude(&self, k: usize) -> f64 {
        let n = self.r.len();
        let k = k.min(n);
        (0..k)
            .chain(n - k..n)
            .map(|i| self.r[i].abs().max(self.p[i].abs()))
            .fold(0.0, f64::max)
    }
}

/// Plain dot product of two fields already known to share a grid.
#[inline]
pub(crate) fn dot(a: &LatticeField, b: &LatticeField) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    let mut s = 0.0;
    for (x, y) in a.r.iter().zip(&b.r) {
        s += x * y;
    }
    for (x, y) in a.p.iter().zip(&b.p) {
        s += x * y;
    }
    s
}
