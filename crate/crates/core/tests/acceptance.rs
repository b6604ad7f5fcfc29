//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 1–3 and the profile part of 10 are checked directly against the
//! library. The rest come from the bundled acceptance suite; every check used
//! here must carry the tolerance pinned below, or the criterion fails.

use std::process::ExitCode;

use lattice_lab::dynamics::{phase_error, Scheme, Stepper};
use lattice_lab::experiments::{parse_suite, run_suite, RunReport, SuiteSummary, ACCEPTANCE_SUITE};
use lattice_lab::lattice::{apply_j_inverse, hamiltonian, inner, LatticeField, LatticeGrid, Potential};
use lattice_lab::modulation::NeutralModes;
use lattice_lab::solitons::{
    default_period, fpu_tangents, solve_fpu_profile, solve_kappa, TodaFamily, WaveFamily,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Clause {
    text: String,
    pass: bool,
}

struct Criterion {
    id: u32,
    title: &'static str,
    clauses: Vec<Clause>,
    info: Vec<String>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, clauses: Vec::new(), info: Vec::new() }
    }

    fn clause(&mut self, pass: bool, text: impl Into<String>) {
        self.clauses.push(Clause { text: text.into(), pass });
    }

    fn pass(&self) -> bool {
        !self.clauses.is_empty() && self.clauses.iter().all(|c| c.pass)
    }

    fn print(&self) {
        let mark = if self.pass() { "PASS" } else { "FAIL" };
        println!("{mark} criterion {:>2}: {}", self.id, self.title);
        for c in &self.clauses {
            println!("       [{}] {}", if c.pass { "ok" } else { "x " }, c.text);
        }
        for i in &self.info {
            println!("       (info) {i}");
        }
    }
}

fn toda_grid(lo: i64, hi: i64) -> LatticeGrid {
    LatticeGrid::zero_padded(lo, hi).unwrap()
}

fn kappa_inversion() -> Criterion {
    let mut k = Criterion::new(1, "kappa inversion");
    let worst = (1..=100)
        .map(|i| {
            let c = 1.0 + 9.0 * i as f64 / 100.0;
            let kappa = solve_kappa(c).unwrap();
            (kappa.sinh() / kappa - c).abs()
        })
        .fold(0.0_f64, f64::max);
    k.clause(worst <= 1e-12, format!("max |sinh κ/κ − c| over 100 c in (1, 10] = {worst:.2e} (≤ 1e-12)"));
    for (c, want) in [(1.0_f64.sinh(), 1.0), (2.0_f64.sinh() / 2.0, 2.0)] {
        let err = (solve_kappa(c).unwrap() - want).abs();
        k.clause(err <= 1e-12, format!("c = {c:.6}: |κ − {want}| = {err:.2e} (≤ 1e-12)"));
    }
    k
}

fn traveling_wave() -> Criterion {
    let mut k = Criterion::new(2, "exact traveling wave under Verlet");
    let (c, t_end, x0) = (1.5, 50.0, -75.0);
    let grid = toda_grid(-300, 300);
    let fam = TodaFamily;
    let u0 = fam.sample(c, x0, &grid).unwrap();
    let h0 = hamiltonian(&u0, &Potential::Toda).unwrap();
    let run = |dt: f64| {
        let mut s = Stepper::new(u0.clone(), Potential::Toda, Scheme::StormerVerlet, dt).unwrap();
        let steps = (t_end / dt).round() as usize;
        let mut sup_osc = 0.0_f64;
        for _ in 0..steps {
            s.step().unwrap();
            sup_osc = sup_osc.max((hamiltonian(s.state(), &Potential::Toda).unwrap() - h0).abs());
        }
        let (err, _) = phase_error(s.state(), &fam, c, x0 + c * t_end).unwrap();
        let drift = (hamiltonian(s.state(), &Potential::Toda).unwrap() - h0).abs() / h0;
        (err, drift, sup_osc / h0)
    };
    let (e1, drift, osc) = run(0.01);
    let (e2, _, _) = run(0.005);
    let ratio = e1 / e2;
    k.clause(e1 <= 1e-4, format!("phase-optimized l² error at dt = 0.01: {e1:.3e} (≤ 1e-4)"));
    k.clause((ratio - 4.0).abs() <= 1.0, format!("error ratio dt → dt/2: {ratio:.4} (4 ± 25%)"));
    k.clause(drift <= 1e-8, format!("relative energy drift at T = 50: {drift:.2e} (≤ 1e-8)"));
    k.info.push(format!("sup relative energy oscillation over the run: {osc:.2e}"));
    k
}

fn symplectic_identities() -> Criterion {
    let mut k = Criterion::new(3, "symplectic and biorthogonality identities");
    let grid = toda_grid(-120, 120);
    let fam = TodaFamily;
    let c = 1.5;
    let t = fam.tangents(c, 0.0, &grid).unwrap();
    let a11 = inner(&t.ud, &apply_j_inverse(&t.ud)).unwrap();
    let a22 = inner(&t.uc, &apply_j_inverse(&t.uc)).unwrap();
    let h = inner(&t.uc, &apply_j_inverse(&t.ud)).unwrap();
    // independent dH/dc: centered difference of the lattice energy
    let step = 1e-5;
    let energy = |c: f64| hamiltonian(&fam.sample(c, 0.0, &grid).unwrap(), &Potential::Toda).unwrap();
    let fd = (energy(c + step) - energy(c - step)) / (2.0 * step);
    k.clause(a11.abs() <= 1e-8, format!("|⟨u̇, J⁻¹u̇⟩| = {:.2e} (≤ 1e-8)", a11.abs()));
    k.clause(a22.abs() <= 1e-8, format!("|⟨∂_c u, J⁻¹∂_c u⟩| = {:.4e} (≤ 1e-8)", a22.abs()));
    let rel = (h - fd).abs() / fd.abs();
    k.clause(rel <= 1e-6, format!("⟨∂_c u, J⁻¹u̇⟩ = {h:.10} vs dH/dc = {fd:.10}: rel {rel:.2e} (≤ 1e-6)"));

    let modes = NeutralModes::new(&fam, c, 0.0, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let center = rng.random_range(-10.0..10.0);
        let v = LatticeField::from_fn(grid, |n| {
            let e = (-((n as f64 - center) / 5.0).powi(2)).exp();
            (e * rng.random_range(-1.0..1.0), e * rng.random_range(-1.0..1.0))
        })
        .unwrap();
        let pv = modes.project(&v).unwrap();
        let ppv = modes.project(&pv).unwrap();
        worst = worst.max(ppv.sub(&pv).unwrap().norm_l2() / v.norm_l2());
    }
    k.clause(worst <= 1e-8, format!("max ‖P²v − Pv‖/‖v‖ over 20 random fields = {worst:.2e} (≤ 1e-8)"));
    for c in [1.1, 1.5, 2.0] {
        let d = fam.tangents(c, 0.0, &grid).unwrap().dhdc;
        k.clause(d > 0.0, format!("dH/dc at c = {c} is {d:.6} (> 0)"));
    }
    k
}

/// Looks up one check of one run and confirms its tolerance is the pinned one.
fn check_clause(k: &mut Criterion, s: &SuiteSummary, run: &str, check: &str, pinned: f64) {
    let Some(r) = s.report(run) else {
        k.clause(false, format!("{run}: missing from the suite"));
        return;
    };
    if let Some(f) = &r.failure {
        k.clause(false, format!("{run}: aborted in {} ({})", f.stage, f.cause));
        return;
    }
    match r.checks.iter().find(|c| c.name == check) {
        None => k.clause(false, format!("{run}/{check}: not evaluated")),
        Some(c) if c.tolerance != pinned => {
            k.clause(false, format!("{run}/{check}: tolerance {} differs from pinned {pinned}", c.tolerance))
        }
        Some(c) => {
            let mut text = format!("{run}/{check} = {:.4e} (tolerance {pinned:e})", c.value);
            for (name, v) in &c.fitted_constants {
                text.push_str(&format!(", {name} {v:.4e}"));
            }
            if c.expected_fail {
                text.push_str(", expected to fail");
            }
            k.clause(c.ok(), text);
        }
    }
}

fn comparison_clause(k: &mut Criterion, s: &SuiteSummary, name: &str, pinned: f64) {
    match s.comparisons.iter().find(|c| c.name == name) {
        None => k.clause(false, format!("{name}: not evaluated")),
        Some(c) if c.tolerance != pinned => {
            k.clause(false, format!("{name}: tolerance {} differs from pinned {pinned}", c.tolerance))
        }
        Some(c) => {
            let consts: Vec<String> = c.fitted_constants.iter().map(|(n, v)| format!("{n} {v:.4e}")).collect();
            k.clause(c.ok(), format!("{name} = {:.4e} (tolerance {pinned:e}) [{}]", c.value, consts.join(", ")));
        }
    }
}

fn metric(s: &SuiteSummary, run: &str, name: &str) -> Option<f64> {
    s.report(run).and_then(|r: &RunReport| r.metric(name))
}

fn linearized(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(4, "linearized decay in the moving weight");
    check_clause(&mut k, s, "linearized-decay", "linear_decay", 0.3);
    if let Some(r) = s.report("linearized-decay").and_then(|r| r.checks.iter().find(|c| c.name == "linear_decay")) {
        let pinned_window = r.window == Some((20.0, 100.0));
        k.clause(pinned_window, format!("fit window {:?} (pinned [20, 100])", r.window));
        let r2 = r.fitted_constants.get("r_squared").copied().unwrap_or(f64::NAN);
        k.clause(r2 >= 0.9, format!("r² = {r2:.6} (≥ 0.9)"));
    }
    let b = 0.5 * 2.0 - 2.0 * 0.25_f64.sinh();
    k.info.push(format!("rate bound b(0.5) = c·a − 2 sinh(a/2) = {b:.6}"));
    check_clause(&mut k, s, "linearized-neutral-ud", "neutral_no_decay", 0.02);
    check_clause(&mut k, s, "linearized-neutral-uc", "neutral_no_decay", 0.02);
    k
}

fn orbital(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(5, "orbital stability scaling");
    for run in ["bump-eps-1e-3", "theorem1-small-bump"] {
        check_clause(&mut k, s, run, "constraint_residual", 1e-9);
    }
    comparison_clause(&mut k, s, "deviation_per_eps_ratio", 3.0);
    comparison_clause(&mut k, s, "energy_pin_ratio", 3.0);
    k
}

fn asymptotic(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(6, "asymptotic convergence");
    check_clause(&mut k, s, "theorem1-small-bump", "c_settling", 0.1);
    check_clause(&mut k, s, "theorem1-small-bump", "tail_norm_ratio", 0.5);
    check_clause(&mut k, s, "theorem1-small-bump", "v2_decay", 0.9);
    if let Some(r) = s.report("bump-slow-wave") {
        let status: Vec<String> =
            r.checks.iter().map(|c| format!("{} {}", c.name, if c.ok() { "ok" } else { "fails" })).collect();
        k.info.push(format!("same checks at c0 = 1.2: {}", status.join(", ")));
    }
    k
}

fn virial(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(7, "virial monotonicity");
    for seed in 1..=5 {
        let run = format!("virial-seed-{seed}");
        check_clause(&mut k, s, &run, "virial_monotone", 1e-10);
        let d = metric(s, &run, "virial_fitted_delta");
        k.clause(d.is_some_and(|d| d > 0.0), format!("{run}: fitted δ̃ = {d:?} (> 0)"));
    }
    check_clause(&mut k, s, "virial-fast-soliton", "virial_monotone", 1e-10);
    if let Some(c) = s.report("virial-fast-soliton").and_then(|r| r.checks.first()) {
        k.clause(c.expected_fail && !c.pass, "fast-soliton fixture is an expected failure and fails");
    }
    k
}

fn rate_law(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(8, "modulation rate law");
    comparison_clause(&mut k, s, "cdot_loglog_slope", 0.15);
    check_clause(&mut k, s, "theorem1-small-bump", "cdot_finite_difference", 0.05);
    k
}

fn v2_bound(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(9, "v2 integral bound");
    comparison_clause(&mut k, s, "v2_integral_eps_ratio", 3.0);
    comparison_clause(&mut k, s, "v2_integral_time_doubling", 0.05);
    k
}

fn fpu(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(10, "FPU profile and perturbed run");
    let v = Potential::fpu(1.0, 1.0, 0.0).unwrap();
    let c = 1.02;
    let period = default_period(&v, c).unwrap();
    let prof = solve_fpu_profile(&v, c, period, (4.0 * period) as usize).unwrap();
    k.clause(prof.residual <= 1e-9, format!("profile residual {:.2e} (≤ 1e-9)", prof.residual));
    let sym = prof.symmetry_error();
    k.clause(sym <= 1e-9, format!("even-symmetry error {sym:.2e} (≤ 1e-9)"));
    let grid = toda_grid(-400, 400);
    for c in [1.01, 1.03, 1.05] {
        let period = default_period(&v, c).unwrap();
        let p = solve_fpu_profile(&v, c, period, (4.0 * period) as usize).unwrap();
        let d = fpu_tangents(&p, &grid, 0.0).unwrap().dhdc;
        k.clause(d > 0.0, format!("dH_F/dc at c = {c} is {d:.6e} (> 0)"));
    }
    check_clause(&mut k, s, "fpu-small-bump", "constraint_residual", 2e-9);
    check_clause(&mut k, s, "fpu-small-bump", "sup_speed_per_eps", 10.0);
    check_clause(&mut k, s, "fpu-small-bump", "c_settling", 0.2);
    check_clause(&mut k, s, "fpu-small-bump", "tail_norm_ratio", 1.0);
    check_clause(&mut k, s, "fpu-small-bump", "v2_decay", 0.9);
    if let Some(r) = s.report("fpu-long-time") {
        let status: Vec<String> =
            r.checks.iter().map(|c| format!("{} {:.3e} {}", c.name, c.value, if c.ok() { "ok" } else { "fails" })).collect();
        k.info.push(format!("over [200, 400]: {}", status.join(", ")));
    }
    k
}

fn two_soliton(s: &SuiteSummary) -> Criterion {
    let mut k = Criterion::new(11, "two-soliton elasticity");
    check_clause(&mut k, s, "two-soliton", "elastic_speed", 1e-3);
    k
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let started = std::time::Instant::now();
    let mut all = vec![kappa_inversion(), traveling_wave(), symplectic_identities()];
    let suite = parse_suite(ACCEPTANCE_SUITE).expect("acceptance suite parses");
    let summary = run_suite(&suite, None).expect("acceptance suite runs");
    all.extend([
        linearized(&summary),
        orbital(&summary),
        asymptotic(&summary),
        virial(&summary),
        rate_law(&summary),
        v2_bound(&summary),
        fpu(&summary),
        two_soliton(&summary),
    ]);
    all.sort_by_key(|k| k.id);
    println!();
    for k in &all {
        k.print();
    }
    let failed: Vec<u32> = all.iter().filter(|k| !k.pass()).map(|k| k.id).collect();
    println!("\n{} of {} criteria pass ({:.0} s)", all.len() - failed.len(), all.len(), started.elapsed().as_secs_f64());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
