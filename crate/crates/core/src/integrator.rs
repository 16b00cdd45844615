//! Time integration of the Galerkin ODE `α' = g(α, t)`.
//!
//! The default is Dormand–Prince 5(4) with a PI step controller; an
//! implicit-midpoint scheme with Newton iterations covers the stiff
//! large-`N` regime. Both store the state on a uniform output grid of
//! `stride` intervals, which is what the diagnostics integrate over.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::assembly::Assembler;
use crate::basis::BasisSet;
use crate::error::{MoplaError, Result};
use crate::geometry::{uniform_grid, DomainMotion, Point};
use crate::problem::ProblemData;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeMethod {
    Erk45,
    ImplicitMidpoint,
}

impl OdeMethod {
    pub fn name(self) -> &'static str {
        match self {
            OdeMethod::Erk45 => "erk45",
            OdeMethod::ImplicitMidpoint => "implicit_midpoint",
        }
    }
}

impl fmt::Display for OdeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OdeMethod {
    type Err = MoplaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "erk45" => Ok(OdeMethod::Erk45),
            "implicit_midpoint" => Ok(OdeMethod::ImplicitMidpoint),
            other => Err(MoplaError::config(
                "ode.method",
                format!("unknown method `{other}` (expected erk45 or implicit_midpoint)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSettings {
    pub method: OdeMethod,
    pub rtol: f64,
    pub atol: f64,
    /// Number of output intervals on `[0, T]`.
    pub stride: usize,
    /// Implicit-midpoint steps per output interval.
    pub substeps: usize,
    /// Explicit steps (accepted plus rejected) before giving up.
    pub max_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings {
            method: OdeMethod::Erk45,
            rtol: 1e-8,
            atol: 1e-10,
            stride: 512,
            substeps: 1,
            max_steps: 2_000_000,
        }
    }
}

impl OdeSettings {
    pub fn check(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(MoplaError::config("ode.rtol", "must be > 0"));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(MoplaError::config("ode.atol", "must be > 0"));
        }
        if self.stride == 0 {
            return Err(MoplaError::config("ode.stride", "must be >= 1"));
        }
        if self.substeps == 0 {
            return Err(MoplaError::config("ode.substeps", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinTrajectory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    pub method: OdeMethod,
    pub rtol: f64,
    pub atol: f64,
}

impl GalerkinTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.states[0]
    }

    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("non-empty trajectory")
    }

    /// `α(t)` by linear interpolation between stored nodes.
    pub fn state_at(&self, t: f64) -> Result<DVector<f64>> {
        let (start, end) = (self.times[0], self.horizon());
        if !(t >= start && t <= end) {
            return Err(MoplaError::OutOfRange { t, start, end });
        }
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return Ok(self.states[0].clone());
        }
        if i == self.times.len() || self.times[i - 1] == t {
            return Ok(self.states[i - 1].clone());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let theta = (t - t0) / (t1 - t0);
        Ok(&self.states[i - 1] * (1.0 - theta) + &self.states[i] * theta)
    }
}

/// `u_N` at the images `Φ_t(X)` of the given reference points, returned as
/// `(physical point, value)` pairs.
pub fn evaluate_solution(
    traj: &GalerkinTrajectory,
    basis: &BasisSet,
    motion: &DomainMotion,
    t: f64,
    points: &[Point],
) -> Result<Vec<(Point, f64)>> {
    let alpha = traj.state_at(t)?;
    Ok(points
        .iter()
        .map(|x| (motion.map_point(x, t), basis.reconstruct(&alpha, x)))
        .collect())
}

/// Integrates from the projection of the problem's initial datum.
pub fn integrate(
    problem: &ProblemData,
    basis: &BasisSet,
    motion: &DomainMotion,
    settings: &OdeSettings,
) -> Result<GalerkinTrajectory> {
    let alpha0 = problem.initial.coefficients(basis)?;
    let assembler = Assembler::new(basis, motion)?;
    integrate_from(&assembler, problem, alpha0, settings)
}

pub fn integrate_from(
    assembler: &Assembler<'_>,
    problem: &ProblemData,
    alpha0: DVector<f64>,
    settings: &OdeSettings,
) -> Result<GalerkinTrajectory> {
    settings.check()?;
    if alpha0.len() != assembler.size() {
        return Err(MoplaError::Input(format!(
            "initial state has {} entries, basis has {}",
            alpha0.len(),
            assembler.size()
        )));
    }
    if alpha0.iter().any(|a| !a.is_finite()) {
        return Err(MoplaError::Divergence { last_good_time: 0.0 });
    }
    let grid = uniform_grid(assembler.motion().horizon(), settings.stride);
    match settings.method {
        OdeMethod::Erk45 => dopri(assembler, problem, alpha0, &grid, settings),
        OdeMethod::ImplicitMidpoint => midpoint(assembler, problem, alpha0, &grid, settings),
    }
}

fn rhs(assembler: &Assembler<'_>, problem: &ProblemData, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    let snap = assembler.snapshot(&problem.forcing, t)?;
    assembler.rhs(&snap, y, problem.p)
}

fn finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn error_norm(err: &DVector<f64>, y0: &DVector<f64>, y1: &DVector<f64>, s: &OdeSettings) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = s.atol + s.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn hermite(y0: &DVector<f64>, f0: &DVector<f64>, y1: &DVector<f64>, f1: &DVector<f64>, h: f64, theta: f64) -> DVector<f64> {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    y0 * h00 + f0 * (h10 * h) + y1 * h01 + f1 * (h11 * h)
}

fn dopri(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    y0: DVector<f64>,
    grid: &[f64],
    s: &OdeSettings,
) -> Result<GalerkinTrajectory> {
    let end = *grid.last().expect("grid");
    let h_max = grid[1] - grid[0];
    let floor = 1e-12 * end;
    let (beta, safe, fac_min, fac_max): (f64, f64, f64, f64) = (0.04, 0.9, 0.2, 10.0);
    let expo1 = 0.2 - 0.75 * beta;

    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut next = 1;

    let mut t = 0.0;
    let mut y = y0;
    let mut f = rhs(asm, problem, t, &y)?;
    if !finite(&f) {
        return Err(MoplaError::Divergence { last_good_time: 0.0 });
    }
    let mut h = initial_step(asm, problem, &y, &f, h_max, s)?;
    let mut fac_old: f64 = 1e-4;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;

    while next < grid.len() {
        if accepted + rejected >= s.max_steps {
            return Err(MoplaError::Stiffness { t, step: h });
        }
        let last = t + h >= end || end - (t + h) < floor;
        if last {
            h = end - t;
        }
        if h < floor && !last {
            return Err(MoplaError::Stiffness { t, step: h });
        }

        let stage = |tt: f64, yy: DVector<f64>| -> Result<Option<DVector<f64>>> {
            if !finite(&yy) {
                return Ok(None);
            }
            let k = rhs(asm, problem, tt, &yy)?;
            Ok(finite(&k).then_some(k))
        };
        let trial = (|| -> Result<Option<_>> {
            let k1 = &f;
            let Some(k2) = stage(t + C2 * h, &y + k1 * (h * A21))? else { return Ok(None) };
            let Some(k3) = stage(t + C3 * h, &y + (k1 * A31 + &k2 * A32) * h)? else { return Ok(None) };
            let Some(k4) = stage(t + C4 * h, &y + (k1 * A41 + &k2 * A42 + &k3 * A43) * h)? else {
                return Ok(None);
            };
            let Some(k5) = stage(t + C5 * h, &y + (k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h)? else {
                return Ok(None);
            };
            let Some(k6) = stage(
                t + h,
                &y + (k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h,
            )?
            else {
                return Ok(None);
            };
            let y1 = &y + (k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
            let t1 = if last { end } else { t + h };
            let Some(k7) = stage(t1, y1.clone())? else { return Ok(None) };
            let err = (k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
            Ok(Some((y1, k7, err)))
        })()?;

        let Some((y1, f1, err_vec)) = trial else {
            // Non-finite stage: retreat hard and retry.
            rejected += 1;
            last_rejected = true;
            h *= 0.1;
            if h < floor {
                return Err(MoplaError::Divergence { last_good_time: t });
            }
            continue;
        };
        let err = error_norm(&err_vec, &y, &y1, s);
        if !err.is_finite() {
            rejected += 1;
            last_rejected = true;
            h *= 0.1;
            if h < floor {
                return Err(MoplaError::Divergence { last_good_time: t });
            }
            continue;
        }

        let fac11 = err.max(1e-300).powf(expo1);
        if err <= 1.0 {
            let t1 = if last { end } else { t + h };
            while next < grid.len() && grid[next] <= t1 {
                let state = if grid[next] == t1 {
                    y1.clone()
                } else {
                    hermite(&y, &f, &y1, &f1, t1 - t, (grid[next] - t) / (t1 - t))
                };
                times.push(grid[next]);
                states.push(state);
                next += 1;
            }
            accepted += 1;
            let mut fac = fac11 / fac_old.powf(beta);
            fac = (1.0 / fac_max).max((1.0 / fac_min).min(fac / safe));
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);
            t = t1;
            y = y1;
            f = f1;
            h = h_new.min(h_max);
            last_rejected = false;
        } else {
            rejected += 1;
            h /= (1.0 / fac_min).min(fac11 / safe);
            last_rejected = true;
        }
    }

    Ok(GalerkinTrajectory {
        times,
        states,
        accepted,
        rejected,
        method: OdeMethod::Erk45,
        rtol: s.rtol,
        atol: s.atol,
    })
}

fn initial_step(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    y: &DVector<f64>,
    f: &DVector<f64>,
    h_max: f64,
    s: &OdeSettings,
) -> Result<f64> {
    let scale = |v: &DVector<f64>| {
        let n = v.len().max(1) as f64;
        (v.iter()
            .zip(y.iter())
            .map(|(a, b)| (a / (s.atol + s.rtol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let (d0, d1) = (scale(y), scale(f));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_max);
    let f1 = rhs(asm, problem, h0, &(y + f * h0))?;
    let d2 = if finite(&f1) { scale(&(f1 - f)) / h0 } else { f64::INFINITY };
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(h_max))
}

fn midpoint(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    y0: DVector<f64>,
    grid: &[f64],
    s: &OdeSettings,
) -> Result<GalerkinTrajectory> {
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut y = y0;
    let mut steps = 0;
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / s.substeps as f64;
        for j in 0..s.substeps {
            let t = w[0] + j as f64 * h;
            y = midpoint_step(asm, problem, &y, t, h, s)?;
            steps += 1;
        }
        times.push(w[1]);
        states.push(y.clone());
    }
    Ok(GalerkinTrajectory {
        times,
        states,
        accepted: steps,
        rejected: 0,
        method: OdeMethod::ImplicitMidpoint,
        rtol: s.rtol,
        atol: s.atol,
    })
}

/// Solves `(2/h) M (m − y) + γ(m) + B m − f = 0` at `t + h/2` and returns `2m − y`.
fn midpoint_step(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    y: &DVector<f64>,
    t: f64,
    h: f64,
    s: &OdeSettings,
) -> Result<DVector<f64>> {
    let tm = t + 0.5 * h;
    let snap = asm.snapshot(&problem.forcing, tm)?;
    let scaled_mass = &snap.mass * (2.0 / h);
    let residual = |m: &DVector<f64>| {
        &scaled_mass * (m - y) + asm.plaplacian_from(&snap.frame, m, problem.p) + &snap.transport * m
            - &snap.load
    };
    // Explicit predictor.
    let g0 = asm.rhs(&snap, y, problem.p)?;
    let mut m = y + g0 * (0.5 * h);
    if !finite(&m) {
        m = y.clone();
    }
    let mut r = residual(&m);
    let mut rnorm = r.norm();
    for _ in 0..60 {
        if !rnorm.is_finite() {
            return Err(MoplaError::Divergence { last_good_time: t });
        }
        let jac = &scaled_mass + asm.plaplacian_jacobian_from(&snap.frame, &m, problem.p) + &snap.transport;
        let delta = jac
            .lu()
            .solve(&r)
            .ok_or(MoplaError::Stiffness { t, step: h })?;
        let mut lambda = 1.0;
        let (mut trial, mut trial_r, mut trial_norm);
        loop {
            trial = &m - &delta * lambda;
            trial_r = residual(&trial);
            trial_norm = trial_r.norm();
            if trial_norm < rnorm || lambda < 1e-4 {
                break;
            }
            lambda *= 0.5;
        }
        let step = (&delta * lambda).amax();
        m = trial;
        r = trial_r;
        rnorm = trial_norm;
        let tol = 1e-3 * s.atol.min(s.rtol) + 1e-14 * m.amax();
        if step <= tol.max(1e-15 * m.amax()) {
            let out = &m * 2.0 - y;
            if !finite(&out) {
                return Err(MoplaError::Divergence { last_good_time: t });
            }
            return Ok(out);
        }
    }
    Err(MoplaError::Stiffness { t, step: h })
}
