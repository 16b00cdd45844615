//! Galerkin solver and diagnostics for the parabolic p-Laplacian on a
//! prescribed moving domain.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod assembly;
pub mod basis;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod output;
pub mod parallel;
pub mod problem;
pub mod quadrature;
pub mod run;

pub use error::{MoplaError, Result};
