//! Subcommand orchestration: runs a scenario, writes its CSV series and a
//! `summary.txt` that doubles as a config file for the same run.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;

use crate::assembly::Assembler;
use crate::basis::BasisSet;
use crate::config::ScenarioConfig;
use crate::diagnostics::{
    boundary_residual_1d, formula, friedrichs_probe, lp_l2_probe, mass_and_energy, material_derivative_energy,
    mms_static_1d, monotonicity_probe, plip_constant, plip_probe, poincare_probe, refinement_study, sin2_window,
    stability_experiment, uniform_pd, weak_form_residual, DiagnosticsReport, Status,
};
use crate::error::{MoplaError, Result};
use crate::geometry::{uniform_grid, validate_motion, DomainMotion, MotionKind};
use crate::integrator::{integrate, OdeSettings};
use crate::output::{g17, Cell, Table};
use crate::parallel::thread_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Verify,
    Probes,
    Mms,
    Refine,
    Stability,
    MotionCheck,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Solve,
        Subcommand::Verify,
        Subcommand::Probes,
        Subcommand::Mms,
        Subcommand::Refine,
        Subcommand::Stability,
        Subcommand::MotionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::Verify => "verify",
            Subcommand::Probes => "probes",
            Subcommand::Mms => "mms",
            Subcommand::Refine => "refine",
            Subcommand::Stability => "stability",
            Subcommand::MotionCheck => "motion-check",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = MoplaError;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| MoplaError::Input(format!("unknown subcommand `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub subcommand: Subcommand,
    pub report: DiagnosticsReport,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 when every enforced check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass() {
            0
        } else {
            2
        }
    }
}

/// Process exit code for a finished or failed run.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(_) => 1,
    }
}

struct Artifacts {
    report: DiagnosticsReport,
    tables: Vec<(&'static str, Table)>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts {
            report: DiagnosticsReport::default(),
            tables: Vec::new(),
        }
    }

    fn table(&mut self, file: &'static str, table: Table) {
        self.tables.push((file, table));
    }
}

pub fn execute(sub: Subcommand, config: &ScenarioConfig, out: &Path) -> Result<RunOutcome> {
    let art = match sub {
        Subcommand::Solve => solve(config, false)?,
        Subcommand::Verify => solve(config, true)?,
        Subcommand::Probes => probes(config)?,
        Subcommand::Mms => mms(config)?,
        Subcommand::Refine => refine(config)?,
        Subcommand::Stability => stability(config)?,
        Subcommand::MotionCheck => motion_check(config)?,
    };
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for (name, table) in &art.tables {
        files.push(table.write(out, name)?);
    }
    files.push(residual_table(&art.report).write(out, "residuals.csv")?);
    let summary = out.join("summary.txt");
    fs::write(&summary, render_summary(sub, config, &art.report))?;
    files.push(summary);
    Ok(RunOutcome {
        subcommand: sub,
        report: art.report,
        files,
    })
}

fn residual_table(report: &DiagnosticsReport) -> Table {
    let mut ids: Vec<&str> = Vec::new();
    for c in &report.checks {
        if !ids.contains(&c.formula) {
            ids.push(c.formula);
        }
    }
    let mut t = Table::new(&ids.join(","), &["check", "formula", "status", "value", "tolerance"]);
    for c in &report.checks {
        t.push(vec![
            c.name.as_str().into(),
            c.formula.into(),
            c.status.label().into(),
            c.value.into(),
            c.tolerance.into(),
        ]);
    }
    t
}

pub fn render_summary(sub: Subcommand, config: &ScenarioConfig, report: &DiagnosticsReport) -> String {
    let mut s = String::new();
    s.push_str("# mopla run summary\n");
    s.push_str(&format!("# subcommand: {sub}\n"));
    s.push_str(&format!(
        "# verdict: {}\n",
        if report.all_pass() { "pass" } else { "FAIL" }
    ));
    s.push_str(&format!("# threads: {}\n", thread_count()));
    s.push_str(&format!("# derived: p' = {}\n", g17(config.conjugate_exponent())));
    s.push_str("#\n# status | formula | check | value | tolerance | note\n");
    for c in &report.checks {
        s.push_str(&format!(
            "# {} | {} | {} | {} | {} | {}\n",
            c.status.label(),
            c.formula,
            c.name,
            g17(c.value),
            g17(c.tolerance),
            c.note
        ));
    }
    s.push_str("#\n# resolved configuration (re-run with --config on this file)\n");
    s.push_str(&config.to_text());
    s
}

fn enforce(status: Status, enforced: bool) -> Status {
    if enforced {
        status
    } else {
        Status::Info
    }
}

fn pass_if(pass: bool, enforced: bool) -> Status {
    enforce(Status::from_pass(pass), enforced)
}

fn motion_of(config: &ScenarioConfig) -> Result<DomainMotion> {
    DomainMotion::from_config(config.motion)
}

fn solve(config: &ScenarioConfig, enforced: bool) -> Result<Artifacts> {
    let problem = config.problem()?;
    let motion = motion_of(config)?;
    let basis = BasisSet::with_order(config.dim, config.basis_n, config.quad_order)?;
    let asm = Assembler::new(&basis, &motion)?;
    let traj = integrate(&problem, &basis, &motion, &config.ode)?;
    let checks = &config.diag.checks;
    let enabled = |name: &str| checks.iter().any(|c| c == name);
    let d = &config.diag;
    let mut art = Artifacts::new();

    let mut columns = vec!["t".to_string()];
    columns.extend((1..=basis.size()).map(|k| format!("alpha_{k}")));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut trajectory = Table::new(formula::ODE, &column_refs);
    for (&t, alpha) in traj.times().iter().zip(traj.states()) {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(alpha.iter().map(|&a| Cell::from(a)));
        trajectory.push(row);
    }
    art.table("trajectory.csv", trajectory);
    art.report
        .info("integrator steps accepted", formula::ODE, traj.accepted as f64)
        .note(format!("{} rejected, method {}", traj.rejected, traj.method));

    let (mass, energy) = mass_and_energy(&asm, &problem, &traj)?;
    let mut mass_table = Table::new(formula::MASS, &["t", "mass", "forcing_integral", "residual"]);
    for i in 0..mass.times.len() {
        mass_table.push(vec![
            mass.times[i].into(),
            mass.mass[i].into(),
            mass.forcing_integral[i].into(),
            mass.residual[i].into(),
        ]);
    }
    art.table("mass.csv", mass_table);
    let mut energy_table = Table::new(
        &format!("{},{}", formula::ENERGY_IDENTITY, formula::ENERGY),
        &["t", "norm_sq", "grad_pp", "dissipation", "i1", "i2", "i3", "residual"],
    );
    for i in 0..energy.times.len() {
        energy_table.push(vec![
            energy.times[i].into(),
            energy.norm_sq[i].into(),
            energy.grad_pp[i].into(),
            energy.dissipation[i].into(),
            energy.i1[i].into(),
            energy.i2[i].into(),
            energy.i3[i].into(),
            energy.residual[i].into(),
        ]);
    }
    art.table("energy.csv", energy_table);

    if enabled("mass") {
        let value = mass.max_residual();
        let status = pass_if(value <= d.mass_tol, enforced);
        art.report
            .push("mass identity residual", formula::MASS, value, d.mass_tol, status)
            .note("max over t of |m(t) − m(0) − ∫(f,1)|");
    }
    if enabled("energy") {
        let value = energy.max_residual();
        let status = pass_if(value <= d.energy_tol, enforced);
        let check = art.report.push("energy identity residual", formula::ENERGY_IDENTITY, value, d.energy_tol, status);
        if value > d.energy_tol && energy.time_error_estimate >= 0.1 * value {
            check.note(format!(
                "time-integration error dominates (Richardson estimate {:.3e}); increase ode.stride",
                energy.time_error_estimate
            ));
        } else {
            check.note(format!("Richardson time-error estimate {:.3e}", energy.time_error_estimate));
        }
        art.report.info("energy bound sup(‖u‖² + 2∫‖∇u‖_p^p)", formula::ENERGY, energy.bound());
        if motion.is_static() && problem.forcing.is_zero() {
            let value = energy.max_norm_increase();
            let status = pass_if(value <= d.norm_tol, enforced);
            art.report
                .push("L2 norm nonincreasing", formula::ENERGY, value, d.norm_tol, status)
                .note("static domain with f = 0");
        }
    }
    if enabled("hien") {
        let hien = material_derivative_energy(&asm, &problem, &traj)?;
        let mut table = Table::new(formula::HIGHER_ENERGY, &["t", "rate_sq", "rate_integral", "grad_term", "total"]);
        for i in 0..hien.times.len() {
            table.push(vec![
                hien.times[i].into(),
                hien.rate_sq[i].into(),
                hien.rate_integral[i].into(),
                hien.grad_term[i].into(),
                hien.total[i].into(),
            ]);
        }
        art.table("hien.csv", table);
        let sup = hien.sup();
        if enforced {
            let halved = OdeSettings {
                rtol: config.ode.rtol / 2.0,
                atol: config.ode.atol / 2.0,
                ..config.ode.clone()
            };
            let traj2 = integrate(&problem, &basis, &motion, &halved)?;
            let sup2 = material_derivative_energy(&asm, &problem, &traj2)?.sup();
            let change = (sup2 - sup).abs() / sup.abs().max(f64::MIN_POSITIVE);
            let change = if sup == sup2 { 0.0 } else { change };
            let status = Status::from_pass(sup.is_finite() && change <= d.hien_tol);
            art.report
                .push("higher energy stable under tolerance halving", formula::HIGHER_ENERGY, change, d.hien_tol, status)
                .note(format!("sup {} vs {} at halved tolerances", g17(sup), g17(sup2)));
        } else {
            art.report.info("higher energy sup", formula::HIGHER_ENERGY, sup);
        }
    }
    if enabled("weak") {
        let window = sin2_window(config.horizon);
        let mut table = Table::new(formula::WEAK_FORM, &["k", "in_span", "value", "scale"]);
        let mut worst: f64 = 0.0;
        for k in 0..basis.size() {
            let mut c = DVector::zeros(basis.size());
            c[k] = 1.0;
            let r = weak_form_residual(&asm, &problem, &traj, &basis, &c, &window)?;
            worst = worst.max(r.value.abs() / r.scale.max(1.0));
            table.push(vec![(k + 1).into(), r.in_span.into(), r.value.into(), r.scale.into()]);
        }
        let outside = BasisSet::legendre(config.dim, basis.size() + 1, basis.rule())?;
        let mut c = DVector::zeros(outside.size());
        c[basis.size()] = 1.0;
        let r = weak_form_residual(&asm, &problem, &traj, &outside, &c, &window)?;
        table.push(vec![outside.size().into(), r.in_span.into(), r.value.into(), r.scale.into()]);
        art.table("weak_form.csv", table);
        let status = pass_if(worst <= d.weak_tol, enforced);
        art.report
            .push("weak form residual on span{w_k}", formula::WEAK_FORM, worst, d.weak_tol, status)
            .note("relative to max(1, term magnitude), window sin²(πt/T)");
        art.report
            .info("weak form residual for w_{N+1}", formula::WEAK_FORM, r.value)
            .note("outside the Galerkin span; not asserted");
    }
    if enabled("pd") {
        let times = uniform_grid(config.horizon, d.pd_grid.max(2) - 1);
        let rows = uniform_pd(&asm, &times)?;
        let mut table = Table::new(formula::UNIFORM_PD, &["t", "min_eigenvalue", "max_eigenvalue"]);
        for r in &rows {
            table.push(vec![r.t.into(), r.min_eigenvalue.into(), r.max_eigenvalue.into()]);
        }
        art.table("pd.csv", table);
        let lowest = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.min_eigenvalue));
        let floor = d.pd_fraction * motion.bounds().c0;
        let status = pass_if(lowest >= floor, enforced);
        art.report
            .push("smallest mass eigenvalue", formula::UNIFORM_PD, lowest, floor, status)
            .note("lower bound: diag.pd_fraction × c₀");
        art.report.info("Jacobian lower bound c₀", formula::DET_BOUND, motion.bounds().c0);
        art.report.info("gradient equivalence constant c₂", formula::GRAD_BOUND, motion.bounds().c2);
    }
    if enabled("boundary") {
        if config.dim == 1 {
            let rows = boundary_residual_1d(&basis, &motion, problem.p, &traj, traj.times())?;
            let mut table = Table::new(formula::BOUNDARY, &["t", "left", "right"]);
            for r in &rows {
                table.push(vec![r.t.into(), r.left.into(), r.right.into()]);
            }
            art.table("boundary.csv", table);
            let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.max_abs()));
            art.report
                .info("boundary flux residual", formula::BOUNDARY, worst)
                .note("holds only as N grows; see the refine subcommand");
        } else {
            art.report
                .info("boundary flux residual", formula::BOUNDARY, f64::NAN)
                .note("skipped: only evaluated for dim = 1");
        }
    }
    Ok(art)
}

fn probe_times(config: &ScenarioConfig) -> Vec<f64> {
    uniform_grid(config.horizon, config.diag.t_grid.max(2) - 1)
}

fn probes(config: &ScenarioConfig) -> Result<Artifacts> {
    let d = &config.diag;
    let enabled = |name: &str| d.probes.iter().any(|c| c == name);
    if d.probes.is_empty() {
        return Err(MoplaError::config("diag.probes", "no probe enabled"));
    }
    let seed = config.seed.ok_or_else(|| {
        MoplaError::config("seed", "required when probes are enabled (set `seed = <u64>` or pass --seed)")
    })?;
    let motion = motion_of(config)?;
    let basis = BasisSet::with_order(config.dim, config.basis_n, config.quad_order)?;
    let asm = Assembler::new(&basis, &motion)?;
    let times = probe_times(config);
    let exponents = config.probe_exponents();
    let mut art = Artifacts::new();

    if enabled("vec_mono") {
        let mut table = Table::new(formula::MONOTONICITY, &["p", "samples", "violations", "min_slack"]);
        for &p in &exponents {
            let r = monotonicity_probe(p, d.vector_samples, d.vector_dim, seed, d.probe_tol)?;
            table.push(vec![p.into(), r.samples.into(), r.violations.into(), r.min_slack.into()]);
            art.report
                .bound(&format!("monotonicity violations (p = {})", g17(p)), formula::MONOTONICITY, r.violations as f64, 0.0)
                .note(format!("{} samples, min relative slack {:.3e}", r.samples, r.min_slack));
        }
        art.table("probe_vec_mono.csv", table);
    }
    if enabled("p_lip") {
        let mut table = Table::new(formula::P_LIPSCHITZ, &["p", "constant", "samples", "violations", "max_ratio"]);
        for &p in &exponents {
            let r = plip_probe(p, d.vector_samples, d.vector_dim, seed, d.probe_tol)?;
            table.push(vec![p.into(), plip_constant(p).into(), r.samples.into(), r.violations.into(), r.max_ratio.into()]);
            art.report
                .bound(&format!("p-Lipschitz violations (p = {})", g17(p)), formula::P_LIPSCHITZ, r.violations as f64, 0.0)
                .note(format!("constant {}, max ratio {:.6}", g17(plip_constant(p)), r.max_ratio));
        }
        art.table("probe_p_lip.csv", table);
    }
    if enabled("lp_l2") {
        let mut table = Table::new(
            formula::LP_L2,
            &["p", "delta", "t", "volume", "c_delta", "max_excess", "violations"],
        );
        for &p in &exponents {
            if p == 2.0 {
                art.report
                    .info("Lp-L2 interpolation (p = 2)", formula::LP_L2, f64::NAN)
                    .note("skipped: needs p > 2");
                continue;
            }
            let r = lp_l2_probe(p, d.delta, &asm, &times, d.function_samples, seed, d.probe_tol)?;
            for row in &r.rows {
                table.push(vec![
                    p.into(),
                    d.delta.into(),
                    row.t.into(),
                    row.volume.into(),
                    row.c_delta.into(),
                    row.max_excess.into(),
                    row.violations.into(),
                ]);
            }
            art.report
                .bound(&format!("Lp-L2 interpolation violations (p = {})", g17(p)), formula::LP_L2, r.violations() as f64, 0.0)
                .note(format!("{} samples on {} times", r.samples, r.rows.len()));
        }
        art.table("probe_lp_l2.csv", table);
    }
    if enabled("poincare") {
        let r = poincare_probe(d.q, &asm, &times, d.function_samples, seed)?;
        let mut table = Table::new(formula::POINCARE, &["t", "constant", "excluded"]);
        for row in &r.rows {
            table.push(vec![row.t.into(), row.constant.into(), row.excluded.into()]);
        }
        art.table("probe_poincare.csv", table);
        let variation = r.variation();
        let pass = variation.is_finite() && variation <= d.poincare_ratio;
        art.report
            .push("Poincaré constant variation over t", formula::POINCARE, variation, d.poincare_ratio, Status::from_pass(pass))
            .note(format!(
                "max constant {:.6}; within pullback factor {:.3}: {}",
                r.max_constant(),
                r.pullback_factor,
                r.within_pullback_factor()
            ));
    }
    if enabled("friedrichs") {
        let fine = BasisSet::with_order(config.dim, d.fine_n, None)?;
        let fine_asm = Assembler::new(&fine, &motion)?;
        let r = friedrichs_probe(d.epsilon, d.friedrichs_c, &fine_asm, &times, d.friedrichs_samples, seed)?;
        let mut table = Table::new(formula::FRIEDRICHS, &["t", "k_min", "holds_with_k0", "slack_k0"]);
        for row in &r.rows {
            table.push(vec![row.t.into(), row.k_min.into(), row.holds_with_k0.into(), row.slack_k0.into()]);
        }
        art.table("probe_friedrichs.csv", table);
        let failing = r.rows.iter().filter(|row| !row.holds_with_k0).count();
        let check = art.report.push(
            "Friedrichs K(t=0) fails at grid times",
            formula::FRIEDRICHS,
            failing as f64,
            0.0,
            Status::from_pass(r.pass()),
        );
        if r.inconclusive() {
            check.note(format!("inconclusive: K exceeds the fine basis size {}; raise diag.fine_n", r.fine_size));
        } else {
            check.note(format!("K₀ = {}, c = {:.6}, ε = {}", r.k0, r.c, r.epsilon));
        }
        art.report
            .info("Parseval slack at t = 0", formula::FRIEDRICHS, r.parseval_slack)
            .note("in-span samples; zero up to rounding");
    }
    Ok(art)
}

fn mms(config: &ScenarioConfig) -> Result<Artifacts> {
    if config.dim != 1 || config.motion.kind != MotionKind::Static {
        return Err(MoplaError::config(
            "motion.kind",
            "the manufactured case runs on the static unit interval (dim = 1, motion.kind = static)",
        ));
    }
    let st = &config.study;
    let mut art = Artifacts::new();
    let mut table = Table::new(formula::MMS, &["n", "l2_error", "final_error", "boundary_max"]);
    let mut rows = Vec::new();
    for &n in &st.mms_n_list {
        let r = mms_static_1d(config.manufactured(), n, config.horizon, &config.ode, config.quad_order)?;
        table.push(vec![n.into(), r.l2_error.into(), r.final_error.into(), r.boundary_max.into()]);
        rows.push(r);
    }
    art.table("mms.csv", table);
    let last = rows.last().expect("non-empty N list");
    art.report
        .bound(&format!("space-time L2 error at N = {}", last.n), formula::MMS, last.l2_error, st.mms_tol);
    if rows.len() > 1 {
        let worst = rows
            .windows(2)
            .map(|w| w[1].l2_error / w[0].l2_error)
            .fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
        art.report
            .bound("error ratio per refinement", formula::MMS, worst, st.mms_ratio)
            .note("errors must strictly decrease");
        art.report
            .info("boundary residual ratio first/last N", formula::BOUNDARY, last.boundary_max / rows[0].boundary_max);
    }
    Ok(art)
}

fn refine(config: &ScenarioConfig) -> Result<Artifacts> {
    let problem = config.problem()?;
    let motion = motion_of(config)?;
    let st = &config.study;
    let mut art = Artifacts::new();
    let mut table = Table::new(formula::STRONG_CONVERGENCE, &["n", "error", "boundary_max"]);
    match refinement_study(&problem, &motion, &st.refine_n_list, st.refine_reference_n, &config.ode, config.quad_order) {
        Ok(r) => {
            for row in &r.rows {
                table.push(vec![row.n.into(), row.error.into(), row.boundary_max.unwrap_or(f64::NAN).into()]);
            }
            let worst = r
                .rows
                .windows(2)
                .map(|w| w[1].error / w[0].error)
                .fold(0.0f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
            let status = Status::from_pass(r.strictly_decreasing());
            art.report
                .push("self-convergence error ratio", formula::STRONG_CONVERGENCE, worst, 1.0, status)
                .note(format!("errors against N = {}; must strictly decrease", r.reference_n));
            if let Some(dec) = r.boundary_decreases() {
                art.report
                    .info("boundary residual decreases with N", formula::BOUNDARY, dec as u8 as f64);
            }
        }
        Err(e) if e.is_discretization() => {
            art.report
                .push("self-convergence", formula::STRONG_CONVERGENCE, f64::NAN, 1.0, Status::Fail)
                .note(format!("quadrature-suspect: {e}; raise quad.order"));
        }
        Err(e) => return Err(e),
    }
    art.table("refine.csv", table);
    Ok(art)
}

fn stability(config: &ScenarioConfig) -> Result<Artifacts> {
    let problem = config.problem()?;
    let motion = motion_of(config)?;
    let basis = BasisSet::with_order(config.dim, config.basis_n, config.quad_order)?;
    let st = &config.study;
    let r = stability_experiment(&problem, &basis, &motion, &st.stability_deltas, &config.ode)?;
    let mut art = Artifacts::new();
    let mut table = Table::new(formula::UNIQUENESS, &["delta", "ratio"]);
    for row in &r.rows {
        table.push(vec![row.delta.into(), row.ratio.into()]);
    }
    art.table("stability.csv", table);
    let spread = r.spread();
    art.report
        .bound("perturbation ratio spread max/min", formula::UNIQUENESS, spread, st.stability_factor);
    art.report
        .push(
            "delta = 0 rerun bitwise identical",
            formula::UNIQUENESS,
            if r.zero_identical { 0.0 } else { 1.0 },
            0.0,
            Status::from_pass(r.zero_identical),
        );
    art.report
        .info("Gronwall-form bound exp(ĉT)", formula::UNIQUENESS, r.gronwall_bound)
        .note(format!("empirical rate ĉ = {:.6}; reported, not asserted", r.gronwall_rate));
    Ok(art)
}

fn motion_check(config: &ScenarioConfig) -> Result<Artifacts> {
    let motion = motion_of(config)?;
    let mc = &config.motion_check;
    let v = validate_motion(&motion, mc.samples, mc.time_samples, mc.h, mc.tol)?;
    let mut art = Artifacts::new();
    let mut table = Table::new(&format!("{},{}", formula::DET_BOUND, formula::GRAD_BOUND), &["quantity", "value"]);
    let b = &v.bounds;
    for (name, value) in [
        ("velocity_error", v.max_velocity_error),
        ("gradient_error", v.max_gradient_error),
        ("velocity_gradient_error", v.max_velocity_gradient_error),
        ("determinant_error", v.max_determinant_error),
        ("jacobi_residual", v.max_jacobi_residual),
        ("c0", b.c0),
        ("c1", b.c1),
        ("c2", b.c2),
        ("grad_jacobian_max", b.grad_jacobian_max),
        ("speed_max", b.speed_max),
        ("divergence_max", b.divergence_max),
    ] {
        table.push(vec![name.into(), value.into()]);
    }
    art.table("motion_check.csv", table);
    art.report.bound("∂tΦ vs finite differences", formula::GRAD_BOUND, v.max_velocity_error, mc.tol);
    art.report.bound("∇Φ vs finite differences", formula::GRAD_BOUND, v.max_gradient_error, mc.tol);
    art.report
        .bound("∇v vs finite differences", formula::GRAD_BOUND, v.max_velocity_gradient_error, mc.tol);
    art.report.bound("J vs det ∇Φ", formula::DET_BOUND, v.max_determinant_error, mc.tol);
    art.report
        .bound("Jacobi identity (div v)∘Φ = ∂tJ/J", formula::DET_BOUND, v.max_jacobi_residual, mc.tol);
    art.report
        .push("Jacobian lower bound c₀ > 0", formula::DET_BOUND, b.c0, 0.0, Status::from_pass(b.c0 > 0.0))
        .note(format!("{} samples", v.samples));
    Ok(art)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.name().parse::<Subcommand>().unwrap(), s);
        }
        assert!("solv".parse::<Subcommand>().is_err());
    }

    #[test]
    fn exit_codes() {
        let err: Result<RunOutcome> = Err(MoplaError::Input("x".into()));
        assert_eq!(exit_code(&err), 1);
        let mut report = DiagnosticsReport::default();
        report.bound("a", formula::MASS, 1.0, 0.5);
        let outcome = RunOutcome {
            subcommand: Subcommand::Verify,
            report,
            files: vec![],
        };
        assert_eq!(outcome.exit_code(), 2);
    }
}
