use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoplaError {
    #[error("configuration error: {field}: {constraint}")]
    Config { field: String, constraint: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("geometry degeneracy at X = ({x:.6}, {y:.6}), t = {t:.6}: {detail}")]
    GeometryDegenerate {
        x: f64,
        y: f64,
        t: f64,
        detail: String,
    },

    #[error("{operation} is only supported in dimension 1 (got {dim})")]
    UnsupportedDimension { operation: &'static str, dim: usize },

    #[error("rank deficiency in Gram-Schmidt at basis index {index} (pivot {pivot:.3e})")]
    RankDeficient { index: usize, pivot: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("singular mass matrix at t = {t:.6} (smallest eigenvalue {min_eigenvalue:.3e}); quadrature may be under-resolved")]
    SingularMass { t: f64, min_eigenvalue: f64 },

    #[error("step size collapsed to {step:.3e} at t = {t:.6}; the system is too stiff, reduce basis.N or use ode.method = implicit_midpoint")]
    Stiffness { t: f64, step: f64 },

    #[error("non-finite state encountered; last good time t = {last_good_time:.6}")]
    Divergence { last_good_time: f64 },

    #[error("time {t} outside trajectory span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MoplaError {
    pub(crate) fn config(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        MoplaError::Config {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    /// Failures that point at an under-resolved discretization rather than bad input.
    pub fn is_discretization(&self) -> bool {
        matches!(
            self,
            MoplaError::RankDeficient { .. } | MoplaError::SingularMass { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, MoplaError>;
