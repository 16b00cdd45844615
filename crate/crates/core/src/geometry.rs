//! Closed-form moving-domain maps on the reference box `[0,1]^n`.
//!
//! Points and matrices are stored in two-component form for both supported
//! dimensions. In one dimension the second coordinate is inert: it is
//! carried through unchanged by every map, so the padded gradient is
//! `diag(dΦ/dX, 1)` and all determinants and traces reduce to the scalar
//! case.
//!
//! Gradient matrices follow the row convention `G[(i, j)] = ∂_i Φ_j`, so that
//! `∇_X (u ∘ Φ) = G (∇_x u ∘ Φ)` and physical gradients are recovered as
//! `G⁻¹ ∇_X U`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};

use crate::error::{MoplaError, Result};

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    Static,
    Translation,
    Dilation,
    Shear2d,
}

impl MotionKind {
    pub fn name(self) -> &'static str {
        match self {
            MotionKind::Static => "static",
            MotionKind::Translation => "translation",
            MotionKind::Dilation => "dilation",
            MotionKind::Shear2d => "shear2d",
        }
    }

    pub const ALL: [MotionKind; 4] = [
        MotionKind::Static,
        MotionKind::Translation,
        MotionKind::Dilation,
        MotionKind::Shear2d,
    ];
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionKind {
    type Err = MoplaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(MotionKind::Static),
            "translation" => Ok(MotionKind::Translation),
            "dilation" => Ok(MotionKind::Dilation),
            "shear2d" => Ok(MotionKind::Shear2d),
            other => Err(MoplaError::config(
                "motion.kind",
                format!("`{other}` is not one of static, translation, dilation, shear2d"),
            )),
        }
    }
}

/// Parametric motion family.
///
/// * `translation`: `Φ_t(X) = X + c t`
/// * `dilation`: `Φ_t(X) = x_c + s(t) (X − x_c)` with `s(t)^n = 1 + a sin(ωt)`,
///   so that `J_t = 1 + a sin(ωt)` in every dimension
/// * `shear2d`: `Φ_t(X) = (X₁ + a sin(ωt) (X₂ − x_c,₂), X₂)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionFamily {
    pub kind: MotionKind,
    pub dim: usize,
    pub amplitude: f64,
    pub omega: f64,
    pub center: [f64; 2],
    pub velocity: [f64; 2],
    pub horizon: f64,
}

impl MotionFamily {
    pub fn new(kind: MotionKind, dim: usize, horizon: f64) -> Self {
        MotionFamily {
            kind,
            dim,
            amplitude: 0.0,
            omega: 1.0,
            center: [0.5, 0.5],
            velocity: [0.0, 0.0],
            horizon,
        }
    }

    pub fn stationary(dim: usize, horizon: f64) -> Self {
        Self::new(MotionKind::Static, dim, horizon)
    }

    pub fn translation(dim: usize, velocity: [f64; 2], horizon: f64) -> Self {
        MotionFamily {
            velocity,
            ..Self::new(MotionKind::Translation, dim, horizon)
        }
    }

    pub fn dilation(dim: usize, amplitude: f64, omega: f64, center: [f64; 2], horizon: f64) -> Self {
        MotionFamily {
            amplitude,
            omega,
            center,
            ..Self::new(MotionKind::Dilation, dim, horizon)
        }
    }

    pub fn shear(amplitude: f64, omega: f64, center: [f64; 2], horizon: f64) -> Self {
        MotionFamily {
            amplitude,
            omega,
            center,
            ..Self::new(MotionKind::Shear2d, 2, horizon)
        }
    }

    fn check(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(MoplaError::config("dim", "must be 1 or 2"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(MoplaError::config("T", "must be finite and > 0"));
        }
        let finite = self.amplitude.is_finite()
            && self.omega.is_finite()
            && self.center.iter().chain(self.velocity.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(MoplaError::config("motion", "parameters must be finite"));
        }
        match self.kind {
            MotionKind::Dilation if self.amplitude.abs() >= 1.0 => Err(MoplaError::config(
                "motion.a",
                format!("dilation requires |a| < 1 (got {})", self.amplitude),
            )),
            MotionKind::Shear2d if self.dim != 2 => {
                Err(MoplaError::config("dim", "shear2d requires dim = 2"))
            }
            _ => Ok(()),
        }
    }
}

/// Jacobian and gradient-equivalence constants estimated by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionBounds {
    /// Lower bound of `J_t`.
    pub c0: f64,
    /// Upper bound of `J_t` and `|∇J_t|`.
    pub c1: f64,
    /// Gradient equivalence constant: `max(σ_max(∇Φ), 1/σ_min(∇Φ))`.
    pub c2: f64,
    pub grad_jacobian_max: f64,
    pub speed_max: f64,
    pub divergence_max: f64,
}

#[derive(Debug, Clone)]
pub struct DomainMotion {
    family: MotionFamily,
    bounds: MotionBounds,
}

pub const DEFAULT_BOUND_SAMPLES: usize = 64;

impl DomainMotion {
    pub fn from_config(family: MotionFamily) -> Result<Self> {
        Self::with_bound_samples(family, DEFAULT_BOUND_SAMPLES)
    }

    pub fn with_bound_samples(family: MotionFamily, samples: usize) -> Result<Self> {
        family.check()?;
        let mut motion = DomainMotion {
            family,
            bounds: MotionBounds {
                c0: 1.0,
                c1: 1.0,
                c2: 1.0,
                grad_jacobian_max: 0.0,
                speed_max: 0.0,
                divergence_max: 0.0,
            },
        };
        motion.bounds = motion.sample_bounds(samples.max(2))?;
        Ok(motion)
    }

    pub fn family(&self) -> &MotionFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim
    }

    pub fn horizon(&self) -> f64 {
        self.family.horizon
    }

    pub fn bounds(&self) -> &MotionBounds {
        &self.bounds
    }

    pub fn is_static(&self) -> bool {
        match self.family.kind {
            MotionKind::Static => true,
            MotionKind::Translation => self.family.velocity.iter().all(|&c| c == 0.0),
            MotionKind::Dilation | MotionKind::Shear2d => {
                self.family.amplitude == 0.0 || self.family.omega == 0.0
            }
        }
    }

    fn sin_phase(&self, t: f64) -> f64 {
        self.family.amplitude * (self.family.omega * t).sin()
    }

    fn cos_phase_rate(&self, t: f64) -> f64 {
        self.family.amplitude * self.family.omega * (self.family.omega * t).cos()
    }

    /// Dilation scale `s(t)` and its derivative.
    fn scale(&self, t: f64) -> (f64, f64) {
        let n = self.family.dim as f64;
        let jac = 1.0 + self.sin_phase(t);
        let s = jac.powf(1.0 / n);
        let ds = s / (n * jac) * self.cos_phase_rate(t);
        (s, ds)
    }

    fn active(&self) -> Vector2<f64> {
        if self.family.dim == 1 {
            Vector2::new(1.0, 0.0)
        } else {
            Vector2::new(1.0, 1.0)
        }
    }

    fn center(&self) -> Point {
        Vector2::new(self.family.center[0], self.family.center[1]).component_mul(&self.active())
    }

    pub fn map_point(&self, x: &Point, t: f64) -> Point {
        match self.family.kind {
            MotionKind::Static => *x,
            MotionKind::Translation => {
                let c = Vector2::new(self.family.velocity[0], self.family.velocity[1])
                    .component_mul(&self.active());
                x + c * t
            }
            MotionKind::Dilation => {
                let (s, _) = self.scale(t);
                let xc = self.center();
                let mut y = xc + (x - xc) * s;
                if self.family.dim == 1 {
                    y[1] = x[1];
                }
                y
            }
            MotionKind::Shear2d => Vector2::new(
                x[0] + self.sin_phase(t) * (x[1] - self.family.center[1]),
                x[1],
            ),
        }
    }

    /// `∇Φ_t(X)` with row `i` equal to `∂_i Φ_t`.
    pub fn map_gradient(&self, _x: &Point, t: f64) -> Matrix2<f64> {
        match self.family.kind {
            MotionKind::Static | MotionKind::Translation => Matrix2::identity(),
            MotionKind::Dilation => {
                let (s, _) = self.scale(t);
                if self.family.dim == 1 {
                    Matrix2::new(s, 0.0, 0.0, 1.0)
                } else {
                    Matrix2::new(s, 0.0, 0.0, s)
                }
            }
            MotionKind::Shear2d => Matrix2::new(1.0, 0.0, self.sin_phase(t), 1.0),
        }
    }

    pub fn jacobian_det(&self, _x: &Point, t: f64) -> f64 {
        match self.family.kind {
            MotionKind::Static | MotionKind::Translation | MotionKind::Shear2d => 1.0,
            MotionKind::Dilation => 1.0 + self.sin_phase(t),
        }
    }

    /// `∂_t J_t(X)`.
    pub fn jacobian_rate(&self, _x: &Point, t: f64) -> f64 {
        match self.family.kind {
            MotionKind::Dilation => self.cos_phase_rate(t),
            _ => 0.0,
        }
    }

    /// `∇_X J_t(X)`; zero for every shipped family.
    pub fn jacobian_gradient(&self, _x: &Point, _t: f64) -> Vector2<f64> {
        Vector2::zeros()
    }

    /// `∂_t Φ_t(X)`, which equals `v_Ω(Φ_t(X), t)`.
    pub fn reference_velocity(&self, x: &Point, t: f64) -> Vector2<f64> {
        match self.family.kind {
            MotionKind::Static => Vector2::zeros(),
            MotionKind::Translation => Vector2::new(self.family.velocity[0], self.family.velocity[1])
                .component_mul(&self.active()),
            MotionKind::Dilation => {
                let (_, ds) = self.scale(t);
                (x - self.center()).component_mul(&self.active()) * ds
            }
            MotionKind::Shear2d => Vector2::new(
                self.cos_phase_rate(t) * (x[1] - self.family.center[1]),
                0.0,
            ),
        }
    }

    /// `∇_X ∂_t Φ_t(X)` in the same row convention as [`Self::map_gradient`].
    pub fn reference_velocity_gradient(&self, _x: &Point, t: f64) -> Matrix2<f64> {
        match self.family.kind {
            MotionKind::Static | MotionKind::Translation => Matrix2::zeros(),
            MotionKind::Dilation => {
                let (_, ds) = self.scale(t);
                if self.family.dim == 1 {
                    Matrix2::new(ds, 0.0, 0.0, 0.0)
                } else {
                    Matrix2::new(ds, 0.0, 0.0, ds)
                }
            }
            MotionKind::Shear2d => Matrix2::new(0.0, 0.0, self.cos_phase_rate(t), 0.0),
        }
    }

    /// `(div v_Ω) ∘ Φ_t = tr((∇Φ_t)⁻¹ ∇_X ∂_tΦ_t)`.
    pub fn reference_divergence(&self, x: &Point, t: f64) -> Result<f64> {
        let g = self.map_gradient(x, t);
        let inv = g.try_inverse().ok_or_else(|| self.degenerate(x, t, "singular ∇Φ_t"))?;
        Ok((inv * self.reference_velocity_gradient(x, t)).trace())
    }

    /// Outward normal velocity `V_Ω` at the left (`Side::Left`, ν = −1) or
    /// right (ν = +1) endpoint of a one-dimensional domain.
    pub fn boundary_normal_velocity(&self, side: Side, t: f64) -> Result<f64> {
        if self.family.dim != 1 {
            return Err(MoplaError::UnsupportedDimension {
                operation: "boundary_normal_velocity",
                dim: self.family.dim,
            });
        }
        let x = side.reference_point();
        Ok(side.normal() * self.reference_velocity(&x, t)[0])
    }

    pub(crate) fn degenerate(&self, x: &Point, t: f64, detail: &str) -> MoplaError {
        MoplaError::GeometryDegenerate {
            x: x[0],
            y: x[1],
            t,
            detail: detail.to_string(),
        }
    }

    /// Sample points on a uniform grid of the closed reference box.
    pub fn sample_points(&self, per_axis: usize) -> Vec<Point> {
        let per_axis = per_axis.max(2);
        let coord = |i: usize| i as f64 / (per_axis - 1) as f64;
        match self.family.dim {
            1 => (0..per_axis).map(|i| Vector2::new(coord(i), 0.0)).collect(),
            _ => (0..per_axis)
                .flat_map(|j| (0..per_axis).map(move |i| Vector2::new(coord(i), coord(j))))
                .collect(),
        }
    }

    pub fn sample_times(&self, count: usize) -> Vec<f64> {
        uniform_grid(self.family.horizon, count.max(2) - 1)
    }

    fn sample_bounds(&self, per_axis: usize) -> Result<MotionBounds> {
        let points = self.sample_points(per_axis);
        let mut bounds = MotionBounds {
            c0: f64::INFINITY,
            c1: 0.0,
            c2: 1.0,
            grad_jacobian_max: 0.0,
            speed_max: 0.0,
            divergence_max: 0.0,
        };
        for t in self.sample_times(per_axis) {
            for x in &points {
                let jac = self.jacobian_det(x, t);
                if !(jac > 0.0) {
                    return Err(self.degenerate(x, t, "J_t <= 0"));
                }
                let grad_j = self.jacobian_gradient(x, t).norm();
                bounds.c0 = bounds.c0.min(jac);
                bounds.c1 = bounds.c1.max(jac).max(grad_j);
                bounds.grad_jacobian_max = bounds.grad_jacobian_max.max(grad_j);
                let (smin, smax) = singular_range(&self.map_gradient(x, t), self.family.dim);
                if smin <= 0.0 {
                    return Err(self.degenerate(x, t, "singular ∇Φ_t"));
                }
                bounds.c2 = bounds.c2.max(smax).max(1.0 / smin);
                bounds.speed_max = bounds.speed_max.max(self.reference_velocity(x, t).norm());
                bounds.divergence_max = bounds
                    .divergence_max
                    .max(self.reference_divergence(x, t)?.abs());
            }
        }
        Ok(bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn reference_point(self) -> Point {
        match self {
            Side::Left => Vector2::new(0.0, 0.0),
            Side::Right => Vector2::new(1.0, 0.0),
        }
    }
}

/// `count + 1` equispaced points on `[0, end]`, the last one exactly `end`.
pub fn uniform_grid(end: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count)
        .map(|i| {
            if i == count {
                end
            } else {
                end * i as f64 / count as f64
            }
        })
        .collect()
}

/// Extreme singular values of the active block of a padded gradient.
fn singular_range(g: &Matrix2<f64>, dim: usize) -> (f64, f64) {
    if dim == 1 {
        let s = g[(0, 0)].abs();
        return (s, s);
    }
    let svd = g.svd(false, false);
    let s = svd.singular_values;
    (s.min(), s.max())
}

/// Finite-difference self-check of a motion.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionValidation {
    pub max_velocity_error: f64,
    pub max_gradient_error: f64,
    pub max_velocity_gradient_error: f64,
    pub max_determinant_error: f64,
    pub max_jacobi_residual: f64,
    pub bounds: MotionBounds,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl MotionValidation {
    pub fn max_discrepancy(&self) -> f64 {
        self.max_velocity_error
            .max(self.max_gradient_error)
            .max(self.max_velocity_gradient_error)
            .max(self.max_determinant_error)
            .max(self.max_jacobi_residual)
    }
}

/// Compares every closed-form derivative against centered differences on a
/// `per_axis^n × time_samples` grid.
pub fn validate_motion(
    motion: &DomainMotion,
    per_axis: usize,
    time_samples: usize,
    h: f64,
    tol: f64,
) -> Result<MotionValidation> {
    if !(h > 0.0) {
        return Err(MoplaError::config("h", "finite-difference step must be > 0"));
    }
    if !(tol > 0.0) {
        return Err(MoplaError::config("tol", "tolerance must be > 0"));
    }
    let dim = motion.dim();
    let points = motion.sample_points(per_axis);
    let times = motion.sample_times(time_samples);
    let rel = |err: f64, reference: f64| err / reference.abs().max(1.0);

    let mut report = MotionValidation {
        max_velocity_error: 0.0,
        max_gradient_error: 0.0,
        max_velocity_gradient_error: 0.0,
        max_determinant_error: 0.0,
        max_jacobi_residual: 0.0,
        bounds: *motion.bounds(),
        samples: points.len() * times.len(),
        tolerance: tol,
        pass: false,
    };

    for &t in &times {
        for x in &points {
            let jac = motion.jacobian_det(x, t);
            if !(jac > 0.0) {
                return Err(motion.degenerate(x, t, "J_t <= 0"));
            }

            let velocity = motion.reference_velocity(x, t);
            let fd_velocity = (motion.map_point(x, t + h) - motion.map_point(x, t - h)) / (2.0 * h);
            let err = (velocity - fd_velocity).amax();
            report.max_velocity_error = report.max_velocity_error.max(rel(err, velocity.amax()));

            let grad = motion.map_gradient(x, t);
            let vgrad = motion.reference_velocity_gradient(x, t);
            for i in 0..dim {
                let mut e = Vector2::zeros();
                e[i] = h;
                let row = (motion.map_point(&(x + e), t) - motion.map_point(&(x - e), t)) / (2.0 * h);
                let err = (grad.row(i).transpose() - row).amax();
                report.max_gradient_error = report.max_gradient_error.max(rel(err, grad.amax()));

                let vrow = (motion.reference_velocity(&(x + e), t)
                    - motion.reference_velocity(&(x - e), t))
                    / (2.0 * h);
                let err = (vgrad.row(i).transpose() - vrow).amax();
                report.max_velocity_gradient_error =
                    report.max_velocity_gradient_error.max(rel(err, vgrad.amax()));
            }

            let det = if dim == 1 { grad[(0, 0)] } else { grad.determinant() };
            report.max_determinant_error = report.max_determinant_error.max(rel((det - jac).abs(), jac));

            let fd_rate = (motion.jacobian_det(x, t + h) - motion.jacobian_det(x, t - h)) / (2.0 * h);
            let div = motion.reference_divergence(x, t)?;
            let residual = (div * jac - fd_rate).abs();
            report.max_jacobi_residual = report.max_jacobi_residual.max(rel(residual, fd_rate));
        }
    }
    report.pass = report.max_discrepancy() <= tol;
    Ok(report)
}

/// Domain volume `|Ω_t| = ∫_{Ω₀} J_t dX` for the shipped families.
pub fn exact_volume(motion: &DomainMotion, t: f64) -> f64 {
    motion.jacobian_det(&Vector2::zeros(), t)
}
