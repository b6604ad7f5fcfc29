use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scenario::{build_family, build_perturbation, project_out, CheckKind, DynamicsKind, Scenario};
use crate::diagnostics::{
    fit_decay, monotonicity_check, tail_norm, v2_integral_bound, write_series_csv, Check, DecayFit,
    MonotonicityReport, VirialSeries, VirialSpec,
};
use crate::dynamics::{evolve_linearized_observed, Stepper};
use crate::error::{LabError, Result};
use crate::lattice::{hamiltonian, weighted_norm_centered, LatticeField, NormKind};
use crate::modulation::{write_track_csv, ModulationTrack, TrackOptions, Tracker};
use crate::solitons::WaveFamily;

/// Stage and cause of an aborted run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub stage: String,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub c_plus: Option<f64>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
    pub failure: Option<RunFailure>,
    pub runtime_seconds: f64,
}

impl RunReport {
    /// No failure, and every check passed or failed as expected.
    pub fn ok(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(Check::ok)
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

/// Sampled output of one run before checks are evaluated.
#[derive(Debug, Default)]
struct Record {
    times: Vec<f64>,
    energy: Vec<f64>,
    track: Option<ModulationTrack>,
    gaps: Vec<f64>,
    virial: Option<VirialSeries>,
    /// `(t, u(t), x(t))` at the requested tail times
    tail_snapshots: Vec<(f64, LatticeField, f64)>,
    /// weighted norm of the linearized solution
    linear_norm: Vec<f64>,
    v0_norm: f64,
}

/// Runs a scenario and writes its artifacts under `out_dir/<name>/` when
/// `out_dir` is given. Errors from any stage are reported, not returned.
pub fn run_scenario(s: &Scenario, out_dir: Option<&Path>) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport {
        scenario: s.clone(),
        c_plus: None,
        checks: Vec::new(),
        metrics: BTreeMap::new(),
        artifacts: Vec::new(),
        failure: None,
        runtime_seconds: 0.0,
    };
    let fail = |stage: &str, e: LabError| RunFailure { stage: stage.into(), cause: e.to_string() };
    match s.validate() {
        Err(e) => report.failure = Some(fail("config", e)),
        Ok(()) => match simulate(s) {
            Err((stage, e)) => report.failure = Some(fail(stage, e)),
            Ok((rec, family)) => {
                evaluate(s, &rec, family.as_deref(), &mut report);
                if let Some(dir) = out_dir {
                    match write_artifacts(s, &rec, &report, dir) {
                        Ok(paths) => report.artifacts = paths,
                        Err(e) => report.failure = Some(fail("output", e)),
                    }
                }
            }
        },
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = out_dir {
        let path = dir.join(&s.name).join("report.json");
        if fs::create_dir_all(dir.join(&s.name)).is_ok() {
            report.artifacts.push(path.clone());
            if let Ok(json) = serde_json::to_string_pretty(&report) {
                let _ = fs::write(&path, json);
            }
        }
    }
    report
}

type Staged<T> = std::result::Result<T, (&'static str, LabError)>;

fn at(stage: &'static str) -> impl Fn(LabError) -> (&'static str, LabError) {
    move |e| (stage, e)
}

fn simulate(s: &Scenario) -> Staged<(Record, Option<Box<dyn WaveFamily>>)> {
    let grid = s.grid;
    let family = match &s.soliton {
        Some(sol) => Some(build_family(&s.model, sol.c0).map_err(at("family"))?),
        None => None,
    };
    let main = family.as_deref().zip(s.soliton.as_ref()).map(|(f, sol)| (f, sol.c0, sol.x0));
    let mut v0 = build_perturbation(&s.perturbation, &s.model, grid, main, s.seed).map_err(at("initial data"))?;
    if s.project_out_neutral {
        let (f, c0, x0) = main.ok_or(("initial data", LabError::Config("projection needs a soliton".into())))?;
        v0 = project_out(&v0, f, c0, x0).map_err(at("initial data"))?;
    }
    let mut rec = Record { v0_norm: v0.norm_l2(), ..Default::default() };
    match s.dynamics {
        DynamicsKind::Linearized => {
            let (f, c0, x0) = main.expect("validated");
            let a = s.weights.a;
            let reproject = s.reproject_neutral;
            evolve_linearized_observed(&v0, f, c0, &s.integrator, x0, |t, v| {
                if reproject && t > 0.0 {
                    *v = project_out(v, f, c0, x0 + c0 * t)?;
                }
                rec.times.push(t);
                rec.linear_norm.push(weighted_norm_centered(v, a, NormKind::X, x0 + c0 * t, None)?);
                Ok(())
            })
            .map_err(at("linearized evolution"))?;
        }
        DynamicsKind::Nonlinear => nonlinear(s, main, &v0, &mut rec)?,
    }
    Ok((rec, family))
}

fn nonlinear(
    s: &Scenario,
    main: Option<(&dyn WaveFamily, f64, f64)>,
    v0: &LatticeField,
    rec: &mut Record,
) -> Staged<()> {
    let cfg = &s.integrator;
    let u0 = match main {
        Some((f, c0, x0)) => f.sample(c0, x0, &s.grid).and_then(|u| u.add(v0)).map_err(at("initial data"))?,
        None => v0.clone(),
    };
    let mut su = Stepper::new(u0, s.model, cfg.scheme, cfg.dt).map_err(at("evolution"))?;
    let mut sv = match main {
        Some(_) => Some(Stepper::new(v0.clone(), s.model, cfg.scheme, cfg.dt).map_err(at("evolution"))?),
        None => None,
    };
    let virial = s.virial.map(|v| VirialSpec { a: v.a, x0: v.x0, slope: v.slope });
    let mut tracker = main.map(|(f, c0, x0)| {
        let kappa = s.weights.kappa.unwrap_or(s.weights.a);
        let opts = TrackOptions { kappa, ..TrackOptions::new(s.weights.a) };
        Tracker::new(f, c0, x0 / c0, c0, rec.v0_norm, opts)
    });
    let mut pending_tails: Vec<f64> = s.tail_times.clone();
    pending_tails.sort_by(f64::total_cmp);
    let pot = s.model;
    let mut observe = |t: f64, u: &LatticeField, v1: &LatticeField, rec: &mut Record| -> Staged<()> {
        rec.times.push(t);
        rec.energy.push(hamiltonian(u, &pot).map_err(at("evolution"))?);
        let mut x_now = None;
        if let Some(tr) = tracker.as_mut() {
            match tr.observe(t, u, v1) {
                Ok((st, _)) => x_now = Some(st.x),
                Err(e) if s.allow_tracking_gaps => {
                    log::debug!("tracking gap at t = {t}: {e}");
                    rec.gaps.push(t);
                }
                Err(e) => return Err(("tracking", e)),
            }
        }
        if let Some(spec) = &virial {
            rec.virial.get_or_insert_with(VirialSeries::default).push(t, v1, &pot, spec);
        }
        while let Some(&tt) = pending_tails.first() {
            if tt > t + 0.5 * cfg.dt {
                break;
            }
            pending_tails.remove(0);
            rec.tail_snapshots.push((t, u.clone(), x_now.unwrap_or(f64::NAN)));
        }
        Ok(())
    };
    observe(0.0, su.state(), sv.as_ref().map_or(su.state(), |x| x.state()), rec)?;
    for k in 1..=cfg.steps() {
        su.step().map_err(at("evolution"))?;
        if let Some(v) = sv.as_mut() {
            v.step().map_err(at("evolution"))?;
        }
        if cfg.is_sample(k) {
            let t = k as f64 * cfg.dt;
            let u = su.state();
            let v1 = sv.as_ref().map_or(u, |x| x.state());
            observe(t, u, v1, rec)?;
        }
    }
    rec.track = tracker.map(Tracker::into_track);
    Ok(())
}

fn evaluate(s: &Scenario, rec: &Record, family: Option<&dyn WaveFamily>, report: &mut RunReport) {
    let m = &mut report.metrics;
    m.insert("eps".into(), rec.v0_norm);
    m.insert("samples".into(), rec.times.len() as f64);
    if let (Some(&h0), Some(&h1)) = (rec.energy.first(), rec.energy.last()) {
        m.insert("energy_drift_rel".into(), if h0 != 0.0 { (h1 - h0).abs() / h0.abs() } else { (h1 - h0).abs() });
    }
    if !rec.gaps.is_empty() {
        m.insert("tracking_gaps".into(), rec.gaps.len() as f64);
    }
    let track = rec.track.as_ref();
    if let Some(tr) = track {
        report.c_plus = tr.c_plus();
        if let Some(cp) = tr.c_plus() {
            m.insert("c_plus".into(), cp);
        }
        m.insert("max_residual".into(), tr.max_residual());
        m.insert("sup_deviation".into(), tr.sup_deviation());
        let sup_dc = tr.samples.iter().map(|x| (x.c - tr.c0).abs()).fold(0.0, f64::max);
        m.insert("sup_c_deviation".into(), sup_dc);
        m.insert("sup_cdot".into(), tr.samples.iter().map(|x| x.cdot.abs()).fold(0.0, f64::max));
        m.insert("sup_energy_pin".into(), tr.sup_energy_pin());
        m.insert("v2_integral".into(), v2_integral_bound(tr));
        if rec.v0_norm > 0.0 {
            m.insert("sup_deviation_per_eps".into(), tr.sup_deviation() / rec.v0_norm);
            m.insert("sup_c_deviation_per_eps".into(), sup_dc / rec.v0_norm);
        }
    }
    let virial_report: Option<MonotonicityReport> = rec.virial.as_ref().map(|v| {
        let tol = s
            .checks
            .iter()
            .find(|c| c.kind == CheckKind::VirialMonotone)
            .map_or(1e-10, |c| c.tolerance);
        monotonicity_check(v, tol)
    });
    if let Some(vr) = &virial_report {
        m.insert("virial_m0".into(), vr.m0);
        m.insert("virial_max_relative_increase".into(), vr.max_relative_increase);
        if let Some(d) = vr.fitted_delta {
            m.insert("virial_fitted_delta".into(), d);
        }
    }
    let sigma = s.sigma.or_else(|| report.c_plus.map(|cp| 0.5 * (s.model.sound_speed() + cp)));
    let tails: Vec<(f64, Result<f64>)> = rec
        .tail_snapshots
        .iter()
        .map(|(t, u, x)| {
            let r = match (sigma, report.c_plus, family) {
                (Some(sg), Some(cp), Some(f)) if x.is_finite() => {
                    f.sample(cp, *x, u.grid()).and_then(|refw| tail_norm(u, sg, *t, Some(&refw)))
                }
                (Some(sg), _, _) => tail_norm(u, sg, *t, None),
                _ => Err(LabError::Config("tail norm needs sigma or a tracked wave".into())),
            };
            (*t, r)
        })
        .collect();
    for (t, r) in &tails {
        if let Ok(v) = r {
            m.insert(format!("tail_norm@{t}"), *v);
        }
    }
    if let Some(sg) = sigma {
        m.insert("sigma".into(), sg);
    }

    let mut checks = Vec::new();
    for spec in &s.checks {
        let tol = spec.tolerance;
        let name = spec.label();
        let missing = |what: &str| Check::new(name.clone(), false, f64::NAN, tol).with_note(format!("{what} unavailable"));
        let check = match &spec.kind {
            CheckKind::ConstraintResidual => match track {
                Some(tr) => Check::at_most(&name, tr.max_residual(), tol),
                None => missing("track"),
            },
            CheckKind::CPlusNearC0 => match (track, report.c_plus) {
                (Some(tr), Some(cp)) => Check::at_most(&name, (cp - tr.c0).abs(), tol),
                _ => missing("track"),
            },
            CheckKind::SupSpeedPerEps => match m.get("sup_c_deviation_per_eps") {
                Some(&v) => Check::at_most(&name, v, tol),
                None => missing("sup |c − c₀| / ε"),
            },
            CheckKind::CSettling { t_mid, t_end } => match track {
                Some(tr) if !tr.is_empty() => {
                    let c0 = tr.samples[0].c;
                    let cm = tr.at(*t_mid).map(|x| x.c).unwrap_or(f64::NAN);
                    let ce = tr.at(*t_end).map(|x| x.c).unwrap_or(f64::NAN);
                    let ratio = (ce - cm).abs() / (cm - c0).abs();
                    Check::at_most(&name, ratio, tol)
                        .with_constant("c(0)", c0)
                        .with_constant("c(t_mid)", cm)
                        .with_constant("c(t_end)", ce)
                }
                _ => missing("track"),
            },
            CheckKind::TailNormRatio { t1, t2 } => {
                let find = |t: f64| {
                    tails
                        .iter()
                        .find(|(tt, _)| (tt - t).abs() <= 0.5 * s.integrator.dt * s.integrator.sample_every as f64)
                        .and_then(|(_, r)| r.as_ref().ok().copied())
                };
                match (find(*t1), find(*t2)) {
                    (Some(a), Some(b)) => Check::at_most(&name, b / a, tol)
                        .with_constant("tail(t1)", a)
                        .with_constant("tail(t2)", b)
                        .with_constant("sigma", sigma.unwrap_or(f64::NAN)),
                    _ => missing("tail norm at the requested times"),
                }
            }
            CheckKind::V2Decay { window } => match track {
                Some(tr) => fit_check(&name, &tr.times(), &tr.column(|x| x.norm_v2_x), *window, |f| {
                    (f.rate > 0.0 && f.r_squared >= tol, f.r_squared)
                }, tol),
                None => missing("track"),
            },
            CheckKind::VirialMonotone => match &virial_report {
                Some(vr) => {
                    let mut c = Check::new(&name, vr.pass, vr.max_relative_increase, tol)
                        .with_constant("M(0)", vr.m0);
                    if let Some(d) = vr.fitted_delta {
                        c = c.with_constant("delta", d);
                    }
                    if let Some(t) = vr.first_violation {
                        c = c.with_note(format!("first increase beyond tolerance at t = {t}"));
                    }
                    c
                }
                None => missing("virial series"),
            },
            CheckKind::CdotFiniteDifference { window } => match track {
                Some(tr) => {
                    let rows: Vec<(f64, f64, f64)> = tr
                        .cdot_cross_check()
                        .into_iter()
                        .filter(|r| r.0 >= window.0 && r.0 <= window.1)
                        .collect();
                    let num: f64 = rows.iter().map(|r| (r.1 - r.2).powi(2)).sum();
                    let den: f64 = rows.iter().map(|r| r.2 * r.2).sum();
                    if rows.is_empty() || den == 0.0 {
                        missing("ċ samples")
                    } else {
                        Check::at_most(&name, (num / den).sqrt(), tol).with_window(*window)
                    }
                }
                None => missing("track"),
            },
            CheckKind::ElasticSpeed { pre_window } => match (track, report.c_plus) {
                (Some(tr), Some(cp)) => {
                    let pre: Vec<f64> = tr
                        .samples
                        .iter()
                        .filter(|x| x.t >= pre_window.0 && x.t <= pre_window.1)
                        .map(|x| x.c)
                        .collect();
                    if pre.is_empty() {
                        missing("pre-interaction samples")
                    } else {
                        let mean = pre.iter().sum::<f64>() / pre.len() as f64;
                        Check::at_most(&name, (cp - mean).abs(), tol)
                            .with_constant("c_pre", mean)
                            .with_constant("c_plus", cp)
                            .with_window(*pre_window)
                    }
                }
                _ => missing("track"),
            },
            CheckKind::LinearDecay { window, min_r2 } => {
                fit_check(&name, &rec.times, &rec.linear_norm, *window, |f| (f.rate >= tol && f.r_squared >= *min_r2, f.rate), tol)
            }
            CheckKind::NeutralNoDecay { window } => {
                fit_check(&name, &rec.times, &rec.linear_norm, *window, |f| (f.rate.abs() <= tol, f.rate.abs()), tol)
            }
            CheckKind::EnergyDrift => match m.get("energy_drift_rel") {
                Some(&d) => Check::at_most(&name, d, tol),
                None => missing("energy series"),
            },
        };
        let check = if spec.expected_fail { check.expect_fail() } else { check };
        checks.push(check);
    }
    if let Some(lin) = fit_metrics(&rec.times, &rec.linear_norm, s) {
        m.insert("linear_rate".into(), lin.rate);
        m.insert("linear_r2".into(), lin.r_squared);
    }
    report.checks = checks;
}

fn fit_metrics(times: &[f64], values: &[f64], s: &Scenario) -> Option<DecayFit> {
    let w = s.checks.iter().find_map(|c| match c.kind {
        CheckKind::LinearDecay { window, .. } | CheckKind::NeutralNoDecay { window } => Some(window),
        _ => None,
    })?;
    fit_decay(times, values, w).ok()
}

fn fit_check(
    name: &str,
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    judge: impl Fn(&DecayFit) -> (bool, f64),
    tol: f64,
) -> Check {
    match fit_decay(times, values, window) {
        Ok(f) => {
            let (pass, value) = judge(&f);
            Check::new(name, pass, value, tol)
                .with_constant("rate", f.rate)
                .with_constant("r_squared", f.r_squared)
                .with_window(window)
        }
        Err(e) => Check::new(name, false, f64::NAN, tol).with_note(e.to_string()).with_window(window),
    }
}

/// Run metadata written as `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub software: String,
    pub version: String,
    pub seed: u64,
    pub scenario: Scenario,
}

fn write_artifacts(s: &Scenario, rec: &Record, report: &RunReport, root: &Path) -> Result<Vec<PathBuf>> {
    let dir = root.join(&s.name);
    let diag = dir.join("diagnostics");
    fs::create_dir_all(&diag)?;
    let mut out = Vec::new();
    if let Some(tr) = &rec.track {
        let p = dir.join("track.csv");
        write_track_csv(tr, fs::File::create(&p)?)?;
        out.push(p);
    }
    if !rec.energy.is_empty() {
        let p = diag.join("energy.csv");
        write_series_csv(fs::File::create(&p)?, &[("t", &rec.times), ("energy", &rec.energy)])?;
        out.push(p);
    }
    if let Some(v) = &rec.virial {
        let p = diag.join("virial.csv");
        write_series_csv(fs::File::create(&p)?, &[("t", &v.times), ("M", &v.energy), ("D", &v.dissipation)])?;
        out.push(p);
    }
    if !rec.linear_norm.is_empty() {
        let p = diag.join("linearized_norm.csv");
        write_series_csv(fs::File::create(&p)?, &[("t", &rec.times), ("norm_X", &rec.linear_norm)])?;
        out.push(p);
    }
    let tails: Vec<(f64, f64)> = report
        .metrics
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("tail_norm@").and_then(|t| t.parse().ok()).map(|t: f64| (t, *v)))
        .collect();
    if !tails.is_empty() {
        let p = diag.join("tail_norm.csv");
        let (t, v): (Vec<f64>, Vec<f64>) = tails.into_iter().unzip();
        write_series_csv(fs::File::create(&p)?, &[("t", &t), ("tail_norm", &v)])?;
        out.push(p);
    }
    let meta = RunMeta {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: s.seed,
        scenario: s.clone(),
    };
    let p = dir.join("meta.json");
    fs::write(&p, serde_json::to_string_pretty(&meta)?)?;
    out.push(p);
    Ok(out)
}
