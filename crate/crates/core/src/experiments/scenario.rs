use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorConfig;
use crate::error::{LabError, Result};
use crate::lattice::{LatticeField, LatticeGrid, Potential};
use crate::modulation::NeutralModes;
use crate::solitons::{FpuFamily, TodaFamily, WaveFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub c0: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeutralMode {
    /// `u̇_c`
    Ud,
    /// `∂_c u_c`
    Uc,
}

/// Initial perturbation `v₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    #[default]
    None,
    /// Gaussian in `r` only, scaled to `‖v₀‖_{l²} = amplitude`.
    LocalizedBump { amplitude: f64, width: f64, center: f64 },
    /// A second solitary wave of speed `c2` centered at `x2`.
    SecondSoliton { c2: f64, x2: f64 },
    /// Seeded uniform noise under a Gaussian envelope, scaled to `amplitude`.
    RandomLocalized {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// A neutral mode of the main wave, scaled to `amplitude`.
    NeutralMode { mode: NeutralMode, amplitude: f64 },
}

fn default_width() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    /// Full lattice for `u` and `v₁`.
    #[default]
    Nonlinear,
    /// Linearization around the unperturbed wave, applied to `v₀`.
    Linearized,
}

/// Weight exponents of the `X(t)` and `W(t)` norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub a: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self { a: 0.1, kappa: None }
    }
}

/// Virial line `x̃(t) = x0 + slope t` with steepness `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialParams {
    pub a: f64,
    #[serde(default)]
    pub x0: f64,
    pub slope: f64,
}

/// A named check evaluated on one run, with its declared tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    #[serde(flatten)]
    pub kind: CheckKind,
    pub tolerance: f64,
    #[serde(default)]
    pub expected_fail: bool,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// `max |F₁|, |F₂| ≤ tol`
    ConstraintResidual,
    /// `|c₊ − c₀| ≤ tol`
    CPlusNearC0,
    /// `sup |c − c₀| ≤ tol · ‖v₀‖`
    SupSpeedPerEps,
    /// `|c(t_end) − c(t_mid)| ≤ tol · |c(t_mid) − c(0)|`
    CSettling { t_mid: f64, t_end: f64 },
    /// `tail(t2) ≤ tol · tail(t1)` for the tail norm at `σ`
    TailNormRatio { t1: f64, t2: f64 },
    /// decay fit of `‖v₂‖_X` has positive rate and `r² ≥ tol`
    V2Decay { window: (f64, f64) },
    /// `Σψ_a h₁` non-increasing within `tol · M(0)` per sample, fitted `δ̃ > 0`
    VirialMonotone,
    /// relative `l²` mismatch of algebraic `ċ` and centered differences of `c` in `window`
    CdotFiniteDifference { window: (f64, f64) },
    /// `|c₊ − mean c over pre_window| ≤ tol`
    ElasticSpeed { pre_window: (f64, f64) },
    /// fitted rate of the linearized `X`-norm `≥ tol` with `r² ≥ min_r2`
    LinearDecay { window: (f64, f64), min_r2: f64 },
    /// `|fitted rate| ≤ tol`
    NeutralNoDecay { window: (f64, f64) },
    /// `|H(T) − H(0)| ≤ tol · |H(0)|`
    EnergyDrift,
}

impl CheckSpec {
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let v = serde_json::to_value(&self.kind).expect("check kinds serialize");
        v["kind"].as_str().unwrap_or("check").to_string()
    }
}

/// One experiment: initial data, integration, tracking and checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "toda")]
    pub model: Potential,
    pub grid: LatticeGrid,
    #[serde(default)]
    pub soliton: Option<SolitonSpec>,
    #[serde(default)]
    pub perturbation: Perturbation,
    /// Replace `v₀` by `Q v₀` (remove its neutral-mode part).
    #[serde(default)]
    pub project_out_neutral: bool,
    /// Linearized runs only: re-apply `Q` at the moving wave after every
    /// sample, removing integrator leakage into the neutral modes.
    #[serde(default)]
    pub reproject_neutral: bool,
    #[serde(default)]
    pub dynamics: DynamicsKind,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub weights: WeightParams,
    #[serde(default)]
    pub virial: Option<VirialParams>,
    /// Tail-norm threshold speed; defaults to `(c_s + c₊)/2`.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Times at which tail norms are recorded.
    #[serde(default)]
    pub tail_times: Vec<f64>,
    /// Keep tracking through failed constraint solves (reported as gaps).
    #[serde(default)]
    pub allow_tracking_gaps: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

fn toda() -> Potential {
    Potential::Toda
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        self.integrator.validate()?;
        let cs = self.model.sound_speed();
        if let Some(s) = &self.soliton {
            if !(s.c0 > cs) {
                return Err(LabError::SubsonicSpeed { c: s.c0, sound_speed: cs });
            }
            let end = s.x0 + s.c0 * self.integrator.t_end;
            if end > self.grid.n_max as f64 || s.x0 < self.grid.n_min as f64 {
                return Err(LabError::WindowExceeded(format!(
                    "scenario {}: wave path {}..{end} leaves the window",
                    self.name, s.x0
                )));
            }
        }
        if self.dynamics == DynamicsKind::Linearized && self.soliton.is_none() {
            return Err(LabError::Config(format!("scenario {}: linearized dynamics needs a soliton", self.name)));
        }
        if self.reproject_neutral && self.dynamics != DynamicsKind::Linearized {
            return Err(LabError::Config(format!("scenario {}: reproject_neutral needs linearized dynamics", self.name)));
        }
        if matches!(self.perturbation, Perturbation::NeutralMode { .. }) && self.soliton.is_none() {
            return Err(LabError::Config(format!("scenario {}: neutral-mode data needs a soliton", self.name)));
        }
        if let Some(v) = &self.virial {
            if !(v.slope > cs && v.a > 0.0) {
                return Err(LabError::Config(format!(
                    "scenario {}: virial slope must exceed {cs} and a must be positive",
                    self.name
                )));
            }
        }
        if !(self.weights.a > 0.0) {
            return Err(LabError::Config(format!("scenario {}: weights.a must be positive", self.name)));
        }
        Ok(())
    }
}

/// The solitary-wave family of a model near speed `c`.
pub fn build_family(model: &Potential, c: f64) -> Result<Box<dyn WaveFamily>> {
    Ok(match model {
        Potential::Toda => Box::new(TodaFamily),
        Potential::Fpu { .. } => Box::new(FpuFamily::around(model, c)?),
    })
}

/// Builds `v₀` on `grid`. `main` is the main wave's family and `(c0, x0)`.
pub fn build_perturbation(
    p: &Perturbation,
    model: &Potential,
    grid: LatticeGrid,
    main: Option<(&dyn WaveFamily, f64, f64)>,
    seed: u64,
) -> Result<LatticeField> {
    let scale_to = |f: LatticeField, amp: f64| -> Result<LatticeField> {
        let n = f.norm_l2();
        if n == 0.0 {
            return Err(LabError::Config("perturbation vanishes on the grid".into()));
        }
        Ok(f.scaled(amp / n))
    };
    match *p {
        Perturbation::None => Ok(LatticeField::zeros(grid)),
        Perturbation::LocalizedBump { amplitude, width, center } => {
            let f = LatticeField::from_fn(grid, |n| {
                let y = (n as f64 - center) / width;
                ((-0.5 * y * y).exp(), 0.0)
            })?;
            scale_to(f, amplitude)
        }
        Perturbation::SecondSoliton { c2, x2 } => build_family(model, c2)?.sample(c2, x2, &grid),
        Perturbation::RandomLocalized { amplitude, center, width } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = LatticeField::from_fn(grid, |n| {
                let y = (n as f64 - center) / width;
                let e = (-0.5 * y * y).exp();
                (e * rng.random_range(-1.0..1.0), e * rng.random_range(-1.0..1.0))
            })?;
            scale_to(f, amplitude)
        }
        Perturbation::NeutralMode { mode, amplitude } => {
            let (fam, c0, x0) =
                main.ok_or_else(|| LabError::Config("neutral-mode data needs a soliton".into()))?;
            let t = fam.tangents(c0, x0, &grid)?;
            let f = match mode {
                NeutralMode::Ud => t.ud,
                NeutralMode::Uc => t.uc,
            };
            scale_to(f, amplitude)
        }
    }
}

/// `Q v₀` at the main wave.
pub fn project_out(v0: &LatticeField, fam: &dyn WaveFamily, c0: f64, x0: f64) -> Result<LatticeField> {
    NeutralModes::new(fam, c0, x0, v0.grid())?.complement(v0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_and_random_are_normalized_and_seeded() {
        let g = LatticeGrid::zero_padded(-50, 50).unwrap();
        let b = build_perturbation(
            &Perturbation::LocalizedBump { amplitude: 1e-2, width: 3.0, center: 0.0 },
            &Potential::Toda,
            g,
            None,
            0,
        )
        .unwrap();
        assert!((b.norm_l2() - 1e-2).abs() < 1e-16 && b.p().iter().all(|&p| p == 0.0));
        let r = |seed| {
            build_perturbation(
                &Perturbation::RandomLocalized { amplitude: 1e-3, center: 5.0, width: 4.0 },
                &Potential::Toda,
                g,
                None,
                seed,
            )
            .unwrap()
        };
        assert_eq!(r(7), r(7));
        assert_ne!(r(7), r(8));
        assert!((r(7).norm_l2() - 1e-3).abs() < 1e-17);
    }

    #[test]
    fn scenario_toml_round_trip() {
        let text = r#"
name = "demo"
grid = { n_min = -100, n_max = 300 }
soliton = { c0 = 1.5, x0 = 0.0 }
perturbation = { kind = "localized_bump", amplitude = 0.01, width = 3.0, center = -5.0 }
integrator = { dt = 0.01, scheme = "rk4", t_end = 50.0 }

[[checks]]
kind = "c_settling"
t_mid = 25.0
t_end = 50.0
tolerance = 0.1
"#;
        let s: Scenario = toml::from_str(text).unwrap();
        s.validate().unwrap();
        assert_eq!(s.model, Potential::Toda);
        assert_eq!(s.checks[0].kind, CheckKind::CSettling { t_mid: 25.0, t_end: 50.0 });
        assert_eq!(s.checks[0].label(), "c_settling");
        let again: Scenario = toml::from_str(&toml::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn validation_catches_bad_paths() {
        let text = r#"
name = "too-far"
grid = { n_min = -100, n_max = 100 }
soliton = { c0 = 1.5, x0 = 0.0 }
integrator = { t_end = 100.0 }
"#;
        let s: Scenario = toml::from_str(text).unwrap();
        assert!(matches!(s.validate(), Err(LabError::WindowExceeded(_))));
    }
}
