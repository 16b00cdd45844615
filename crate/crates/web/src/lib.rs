//! Browser bindings: a 1-D solve on a moving interval, the mapped grid of
//! a motion family, and the pointwise vector inequality probes.
//!
//! The `*_impl` functions carry the logic so they can be tested natively.

use mopla::assembly::Assembler;
use mopla::basis::BasisSet;
use mopla::diagnostics::{mass_and_energy, monotonicity_probe, plip_constant, plip_probe};
use mopla::geometry::{DomainMotion, MotionFamily, MotionKind, Point};
use mopla::integrator::{evaluate_solution, integrate, OdeSettings};
use mopla::problem::{Forcing, InitialDatum, ProblemData};
use wasm_bindgen::prelude::*;

fn family(kind: &str, dim: usize, a: f64, omega: f64, horizon: f64) -> Result<MotionFamily, String> {
    let kind: MotionKind = kind.parse().map_err(|e: mopla::MoplaError| e.to_string())?;
    Ok(match kind {
        MotionKind::Static => MotionFamily::stationary(dim, horizon),
        MotionKind::Translation => MotionFamily::translation(dim, [a, 0.5 * a], horizon),
        MotionKind::Dilation => MotionFamily::dilation(dim, a, omega, [0.5, 0.5], horizon),
        MotionKind::Shear2d => MotionFamily::shear(a, omega, [0.5, 0.5], horizon),
    })
}

/// Sampled 1-D solution: `frames` snapshots of `points` physical
/// positions and values each, stored frame-major.
#[wasm_bindgen]
pub struct Simulation {
    times: Vec<f64>,
    xs: Vec<f64>,
    values: Vec<f64>,
    points: usize,
    mass_residual: f64,
    energy_residual: f64,
}

#[wasm_bindgen]
impl Simulation {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn frame_count(&self) -> usize {
        self.times.len()
    }

    pub fn xs(&self, frame: usize) -> Vec<f64> {
        self.slice(&self.xs, frame)
    }

    pub fn values(&self, frame: usize) -> Vec<f64> {
        self.slice(&self.values, frame)
    }

    pub fn mass_residual(&self) -> f64 {
        self.mass_residual
    }

    pub fn energy_residual(&self) -> f64 {
        self.energy_residual
    }
}

impl Simulation {
    fn slice(&self, data: &[f64], frame: usize) -> Vec<f64> {
        let frame = frame.min(self.times.len().saturating_sub(1));
        data[frame * self.points..(frame + 1) * self.points].to_vec()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_1d_impl(
    p: f64,
    kind: &str,
    a: f64,
    omega: f64,
    n: usize,
    horizon: f64,
    frames: usize,
    points: usize,
) -> Result<Simulation, String> {
    let err = |e: mopla::MoplaError| e.to_string();
    if frames < 2 || points < 2 {
        return Err("need at least 2 frames and 2 points".into());
    }
    let motion = DomainMotion::from_config(family(kind, 1, a, omega, horizon)?).map_err(err)?;
    let basis = BasisSet::with_order(1, n, None).map_err(err)?;
    let problem = ProblemData::new(
        p,
        Forcing::Zero,
        InitialDatum::Bump {
            amplitude: 1.0,
            center: [0.3, 0.5],
            width: 0.1,
        },
    )
    .map_err(err)?;
    let settings = OdeSettings {
        stride: 1024,
        ..OdeSettings::default()
    };
    let traj = integrate(&problem, &basis, &motion, &settings).map_err(err)?;
    let asm = Assembler::new(&basis, &motion).map_err(err)?;
    let (mass, energy) = mass_and_energy(&asm, &problem, &traj).map_err(err)?;

    let reference: Vec<Point> = (0..points)
        .map(|i| Point::new(i as f64 / (points - 1) as f64, 0.0))
        .collect();
    let mut sim = Simulation {
        times: Vec::with_capacity(frames),
        xs: Vec::with_capacity(frames * points),
        values: Vec::with_capacity(frames * points),
        points,
        mass_residual: mass.max_residual(),
        energy_residual: energy.max_residual(),
    };
    for f in 0..frames {
        let t = horizon * f as f64 / (frames - 1) as f64;
        for (x, u) in evaluate_solution(&traj, &basis, &motion, t, &reference).map_err(err)? {
            sim.xs.push(x[0]);
            sim.values.push(u);
        }
        sim.times.push(t);
    }
    Ok(sim)
}

/// Solves `∂u/∂t = Δ_p u` from a bump datum on a moving interval.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_1d(
    p: f64,
    kind: &str,
    a: f64,
    omega: f64,
    n: usize,
    horizon: f64,
    frames: usize,
    points: usize,
) -> Result<Simulation, JsError> {
    simulate_1d_impl(p, kind, a, omega, n, horizon, frames, points).map_err(|e| JsError::new(&e))
}

/// Images `Φ_t(X)` of a `per_axis × per_axis` reference grid, interleaved as `x, y`.
pub fn motion_grid_impl(kind: &str, a: f64, omega: f64, t: f64, per_axis: usize) -> Result<Vec<f64>, String> {
    let horizon = t.max(1e-9);
    let motion = DomainMotion::from_config(family(kind, 2, a, omega, horizon)?).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * per_axis * per_axis);
    for point in motion.sample_points(per_axis) {
        let x = motion.map_point(&point, t);
        out.push(x[0]);
        out.push(x[1]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn motion_grid(kind: &str, a: f64, omega: f64, t: f64, per_axis: usize) -> Result<Vec<f64>, JsError> {
    motion_grid_impl(kind, a, omega, t, per_axis).map_err(|e| JsError::new(&e))
}

/// `[monotonicity violations, min slack, p-Lipschitz violations, max ratio, constant]`.
pub fn vector_probe_impl(p: f64, samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    let err = |e: mopla::MoplaError| e.to_string();
    let mono = monotonicity_probe(p, samples, 3, seed, 1e-10).map_err(err)?;
    let lip = plip_probe(p, samples, 3, seed, 1e-10).map_err(err)?;
    Ok(vec![
        mono.violations as f64,
        mono.min_slack,
        lip.violations as f64,
        lip.max_ratio,
        plip_constant(p),
    ])
}

#[wasm_bindgen]
pub fn vector_probe(p: f64, samples: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    vector_probe_impl(p, samples, seed).map_err(|e| JsError::new(&e))
}
