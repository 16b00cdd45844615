//! Problem data: exponent, forcing and initial datum.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::basis::{project_initial, BasisSet};
use crate::error::{MoplaError, Result};
use crate::geometry::Point;

pub type ForcingFn = Arc<dyn Fn(&Point, &Point, f64) -> f64 + Send + Sync>;
pub type DatumFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Exact solution `u*(x,t) = g(t) cos(π x₁)` with `g(t) = A e^{−λt}` on the
/// static unit interval. It satisfies the homogeneous flux condition at
/// both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub p: f64,
    pub amplitude: f64,
    pub rate: f64,
}

impl Manufactured {
    pub fn profile(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * t).exp()
    }

    pub fn profile_rate(&self, t: f64) -> f64 {
        -self.rate * self.profile(t)
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        self.profile(t) * (PI * x).cos()
    }

    /// `f = g' cos(πx) + (p−1) π^p |g|^{p−2} g |sin πx|^{p−2} cos(πx)`.
    pub fn forcing(&self, x: f64, t: f64) -> f64 {
        let g = self.profile(t);
        let (s, c) = (PI * x).sin_cos();
        let degenerate = signed_power(g, self.p - 1.0) * signed_power(s.abs(), self.p - 2.0);
        self.profile_rate(t) * c + (self.p - 1.0) * PI.powf(self.p) * degenerate * c
    }
}

/// `|x|^{e−1} x` written so that `0^0` style limits vanish for `e > 0`.
pub(crate) fn signed_power(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        if e == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[derive(Clone)]
pub enum Forcing {
    Zero,
    Constant(f64),
    /// `A sin(ωt) cos(π x₁)` in physical coordinates.
    Oscillating { amplitude: f64, omega: f64 },
    Manufactured(Manufactured),
    /// Receives the reference point, its image `Φ_t(X)`, and `t`.
    Custom(ForcingFn),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => f.write_str("Zero"),
            Forcing::Constant(a) => write!(f, "Constant({a})"),
            Forcing::Oscillating { amplitude, omega } => {
                write!(f, "Oscillating {{ amplitude: {amplitude}, omega: {omega} }}")
            }
            Forcing::Manufactured(m) => write!(f, "Manufactured({m:?})"),
            Forcing::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Forcing {
    pub fn eval(&self, reference: &Point, physical: &Point, t: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(a) => *a,
            Forcing::Oscillating { amplitude, omega } => {
                amplitude * (omega * t).sin() * (PI * physical[0]).cos()
            }
            Forcing::Manufactured(m) => m.forcing(physical[0], t),
            Forcing::Custom(f) => f(reference, physical, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

#[derive(Clone)]
pub enum InitialDatum {
    Zero,
    Constant(f64),
    /// `offset + A cos(kπX₁)`.
    Cosine { amplitude: f64, wavenumber: f64, offset: f64 },
    /// `A w_k^0` (1-based index).
    Mode { amplitude: f64, index: usize },
    /// `A exp(−|X − c|² / (2 w²))`.
    Bump { amplitude: f64, center: [f64; 2], width: f64 },
    Custom(DatumFn),
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialDatum::Zero => f.write_str("Zero"),
            InitialDatum::Constant(a) => write!(f, "Constant({a})"),
            InitialDatum::Cosine { amplitude, wavenumber, offset } => write!(
                f,
                "Cosine {{ amplitude: {amplitude}, wavenumber: {wavenumber}, offset: {offset} }}"
            ),
            InitialDatum::Mode { amplitude, index } => {
                write!(f, "Mode {{ amplitude: {amplitude}, index: {index} }}")
            }
            InitialDatum::Bump { amplitude, center, width } => write!(
                f,
                "Bump {{ amplitude: {amplitude}, center: {center:?}, width: {width} }}"
            ),
            InitialDatum::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl InitialDatum {
    fn pointwise(&self) -> Option<Box<dyn Fn(&Point) -> f64 + '_>> {
        match self {
            InitialDatum::Zero => Some(Box::new(|_| 0.0)),
            InitialDatum::Constant(a) => Some(Box::new(move |_| *a)),
            InitialDatum::Cosine { amplitude, wavenumber, offset } => {
                Some(Box::new(move |x| offset + amplitude * (wavenumber * PI * x[0]).cos()))
            }
            InitialDatum::Bump { amplitude, center, width } => Some(Box::new(move |x| {
                let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                amplitude * (-d2 / (2.0 * width * width)).exp()
            })),
            InitialDatum::Custom(f) => Some(Box::new(move |x| f(x))),
            InitialDatum::Mode { .. } => None,
        }
    }

    /// Initial Galerkin coefficients `α(0) = ((u0, w_k^0))_k`.
    pub fn coefficients(&self, basis: &BasisSet) -> Result<DVector<f64>> {
        match self {
            InitialDatum::Mode { amplitude, index } => {
                if *index == 0 {
                    return Err(MoplaError::config("problem.u0.k", "mode index is 1-based"));
                }
                let mut c = DVector::zeros(basis.size());
                if *index <= basis.size() {
                    c[index - 1] = *amplitude;
                }
                Ok(c)
            }
            other => {
                let f = other.pointwise().expect("pointwise datum");
                project_initial(f, basis)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemData {
    pub p: f64,
    pub forcing: Forcing,
    pub initial: InitialDatum,
}

impl ProblemData {
    pub fn new(p: f64, forcing: Forcing, initial: InitialDatum) -> Result<Self> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(MoplaError::config("p", format!("p must be ≥ 2 (got {p})")));
        }
        Ok(ProblemData { p, forcing, initial })
    }

    /// Conjugate exponent `p' = p/(p−1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}
