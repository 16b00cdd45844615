//! Multi-run studies: manufactured solution, self-convergence, stability.

use nalgebra::DVector;

use super::identities::{boundary_residual_1d, BoundaryRow};
use super::simpson;
use crate::assembly::Assembler;
use crate::basis::BasisSet;
use crate::error::{MoplaError, Result};
use crate::geometry::{DomainMotion, MotionFamily};
use crate::integrator::{integrate, integrate_from, GalerkinTrajectory, OdeSettings};
use crate::problem::{Forcing, InitialDatum, Manufactured, ProblemData};
use crate::quadrature::{default_order, gauss_legendre_rule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdRow {
    pub t: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Extreme eigenvalues of `M(t)` on a time grid.
pub fn uniform_pd(asm: &Assembler<'_>, times: &[f64]) -> Result<Vec<PdRow>> {
    times
        .iter()
        .map(|&t| {
            let eig = asm.assemble_mass(t)?.symmetric_eigenvalues();
            Ok(PdRow {
                t,
                min_eigenvalue: eig.min(),
                max_eigenvalue: eig.max(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsReport {
    pub n: usize,
    /// `‖u_N − u*‖_{L²(Q_T)}`.
    pub l2_error: f64,
    /// `‖u_N(T) − u*(T)‖_{L²}`.
    pub final_error: f64,
    pub boundary_max: f64,
    pub trajectory: GalerkinTrajectory,
}

/// Manufactured solution `u* = A e^{−λt} cos(πx)` on the static unit interval.
pub fn mms_static_1d(
    exact: Manufactured,
    n: usize,
    horizon: f64,
    settings: &OdeSettings,
    quad_order: Option<usize>,
) -> Result<MmsReport> {
    let problem = ProblemData::new(
        exact.p,
        Forcing::Manufactured(exact),
        InitialDatum::Cosine {
            amplitude: exact.amplitude,
            wavenumber: 1.0,
            offset: 0.0,
        },
    )?;
    let motion = DomainMotion::from_config(MotionFamily::stationary(1, horizon))?;
    let basis = BasisSet::with_order(1, n, quad_order)?;
    let traj = integrate(&problem, &basis, &motion, settings)?;

    let rule = gauss_legendre_rule(default_order(n).max(48), 1)?;
    let table = basis.tabulate(&rule);
    let sq_error = |t: f64, alpha: &DVector<f64>| {
        rule.nodes()
            .iter()
            .zip(rule.weights())
            .enumerate()
            .map(|(q, (x, w))| {
                let u: f64 = table.values_at(q).iter().zip(alpha.iter()).map(|(v, a)| v * a).sum();
                w * (u - exact.exact(x[0], t)).powi(2)
            })
            .sum::<f64>()
    };
    let errors: Vec<f64> = traj.times().iter().zip(traj.states()).map(|(&t, a)| sq_error(t, a)).collect();
    let h = traj.times()[1] - traj.times()[0];
    let boundary = boundary_residual_1d(&basis, &motion, exact.p, &traj, traj.times())?;
    Ok(MmsReport {
        n,
        l2_error: simpson(h, &errors).max(0.0).sqrt(),
        final_error: errors.last().copied().unwrap_or(0.0).sqrt(),
        boundary_max: boundary.iter().fold(0.0, |m, r| m.max(r.max_abs())),
        trajectory: traj,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub n: usize,
    /// Space-time `L²(Q_T)` distance to the reference run.
    pub error: f64,
    /// Largest endpoint residual of the weak boundary condition (1D only).
    pub boundary_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub reference_n: usize,
    pub rows: Vec<RefinementRow>,
    pub reference_boundary_max: Option<f64>,
}

impl RefinementReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error) && self.rows.iter().all(|r| r.error.is_finite())
    }

    /// Whether the boundary residual at the reference size is below the coarsest one.
    pub fn boundary_decreases(&self) -> Option<bool> {
        let first = self.rows.first()?.boundary_max?;
        Some(self.reference_boundary_max? < first)
    }
}

/// Self-convergence of coarse runs against a reference run with
/// `reference_n` basis functions, measured on the reference quadrature.
pub fn refinement_study(
    problem: &ProblemData,
    motion: &DomainMotion,
    n_list: &[usize],
    reference_n: usize,
    settings: &OdeSettings,
    quad_order: Option<usize>,
) -> Result<RefinementReport> {
    if n_list.is_empty() {
        return Err(MoplaError::config("refine.n_list", "must not be empty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MoplaError::config("refine.n_list", "must be strictly increasing"));
    }
    if n_list.iter().any(|&n| n > reference_n) {
        return Err(MoplaError::config("refine.reference_n", "must be >= every entry of refine.n_list"));
    }
    let dim = motion.dim();
    let reference_basis = BasisSet::with_order(dim, reference_n, quad_order)?;
    let reference = integrate(problem, &reference_basis, motion, settings)?;
    let ref_asm = Assembler::new(&reference_basis, motion)?;
    let rule = reference_basis.rule();
    let ref_table = reference_basis.table();
    let times = reference.times().to_vec();
    let h = times[1] - times[0];
    let weights: Vec<Vec<f64>> = times.iter().map(|&t| ref_asm.frame(t).map(|f| f.wj)).collect::<Result<_>>()?;

    let boundary = |basis: &BasisSet, traj: &GalerkinTrajectory| -> Result<Option<f64>> {
        if dim != 1 {
            return Ok(None);
        }
        let rows: Vec<BoundaryRow> = boundary_residual_1d(basis, motion, problem.p, traj, traj.times())?;
        Ok(Some(rows.iter().fold(0.0, |m, r| m.max(r.max_abs()))))
    };

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let basis = BasisSet::with_order(dim, n, quad_order)?;
        let traj = integrate(problem, &basis, motion, settings)?;
        let table = basis.tabulate(rule);
        let sq: Vec<f64> = traj
            .states()
            .iter()
            .zip(reference.states())
            .zip(&weights)
            .map(|((a, r), wj)| {
                (0..rule.len())
                    .map(|q| {
                        let u: f64 = table.values_at(q).iter().zip(a.iter()).map(|(v, c)| v * c).sum();
                        let ur: f64 = ref_table.values_at(q).iter().zip(r.iter()).map(|(v, c)| v * c).sum();
                        wj[q] * (u - ur).powi(2)
                    })
                    .sum()
            })
            .collect();
        rows.push(RefinementRow {
            n,
            error: simpson(h, &sq).max(0.0).sqrt(),
            boundary_max: boundary(&basis, &traj)?,
        });
    }
    Ok(RefinementReport {
        reference_n,
        rows,
        reference_boundary_max: boundary(&reference_basis, &reference)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub delta: f64,
    /// `sup_t ‖u₁ − u₂‖_{L²(Ω_t)} / δ`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Whether the unperturbed rerun reproduced the base trajectory bit for bit.
    pub zero_identical: bool,
    /// Empirical Gronwall rate `¼ sup|v|² + ½ sup|div v|` from the motion bounds.
    pub gronwall_rate: f64,
    pub gronwall_bound: f64,
}

impl StabilityReport {
    pub fn spread(&self) -> f64 {
        let hi = self.rows.iter().fold(0.0f64, |m, r| m.max(r.ratio));
        let lo = self.rows.iter().fold(f64::INFINITY, |m, r| m.min(r.ratio));
        hi / lo
    }

    pub fn pass(&self) -> bool {
        let s = self.spread();
        self.zero_identical && s.is_finite() && s <= 2.0
    }
}

/// Runs `(u₀, u₀ + δ w₂⁰)` pairs for every `δ`, plus an unperturbed rerun.
pub fn stability_experiment(
    problem: &ProblemData,
    basis: &BasisSet,
    motion: &DomainMotion,
    deltas: &[f64],
    settings: &OdeSettings,
) -> Result<StabilityReport> {
    if basis.size() < 2 {
        return Err(MoplaError::config("basis.N", "the stability experiment needs N >= 2"));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(MoplaError::config("stability.deltas", "perturbation sizes must be > 0"));
    }
    let asm = Assembler::new(basis, motion)?;
    let alpha0 = problem.initial.coefficients(basis)?;
    let base = integrate_from(&asm, problem, alpha0.clone(), settings)?;
    let rerun = integrate_from(&asm, problem, alpha0.clone(), settings)?;
    let zero_identical = base.states().len() == rerun.states().len()
        && base
            .states()
            .iter()
            .zip(rerun.states())
            .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));

    let masses: Vec<_> = base.times().iter().map(|&t| asm.assemble_mass(t)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut perturbed = alpha0.clone();
        perturbed[1] += delta;
        let other = integrate_from(&asm, problem, perturbed, settings)?;
        let sup = base
            .states()
            .iter()
            .zip(other.states())
            .zip(&masses)
            .map(|((a, b), m)| {
                let d = a - b;
                d.dot(&(m * &d)).max(0.0).sqrt()
            })
            .fold(0.0, f64::max);
        rows.push(StabilityRow { delta, ratio: sup / delta });
    }
    let b = motion.bounds();
    let rate = 0.25 * b.speed_max * b.speed_max + 0.5 * b.divergence_max;
    Ok(StabilityReport {
        rows,
        zero_identical,
        gronwall_rate: rate,
        gronwall_bound: (rate * motion.horizon()).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tight(stride: usize) -> OdeSettings {
        OdeSettings { rtol: 1e-10, atol: 1e-12, stride, ..OdeSettings::default() }
    }

    #[test]
    fn zero_profile_gives_zero_error() {
        let exact = Manufactured { p: 3.0, amplitude: 0.0, rate: 1.0 };
        let r = mms_static_1d(exact, 4, 0.2, &tight(32), None).unwrap();
        assert_eq!(r.l2_error, 0.0);
        assert_eq!(r.boundary_max, 0.0);
    }

    #[test]
    fn heat_mms_at_n8() {
        let exact = Manufactured { p: 2.0, amplitude: 1.0, rate: PI * PI };
        let r = mms_static_1d(exact, 8, 0.1, &tight(128), None).unwrap();
        assert!(r.l2_error <= 1e-4, "{}", r.l2_error);
    }

    #[test]
    fn refinement_of_heat_problem_decays() {
        let problem = ProblemData::new(
            2.0,
            Forcing::Zero,
            InitialDatum::Bump { amplitude: 1.0, center: [0.3, 0.5], width: 0.15 },
        )
        .unwrap();
        let motion = DomainMotion::from_config(MotionFamily::stationary(1, 0.01)).unwrap();
        let r = refinement_study(&problem, &motion, &[2, 4, 8], 16, &tight(32), None).unwrap();
        assert!(r.strictly_decreasing(), "{r:?}");
        let same = refinement_study(&problem, &motion, &[8], 8, &tight(32), None).unwrap();
        assert_eq!(same.rows[0].error, 0.0);
        assert!(refinement_study(&problem, &motion, &[4, 2], 8, &tight(8), None).is_err());
    }

    #[test]
    fn truncated_quadrature_is_a_discretization_failure() {
        let problem = ProblemData::new(3.0, Forcing::Zero, InitialDatum::Constant(1.0)).unwrap();
        let motion = DomainMotion::from_config(MotionFamily::stationary(1, 0.1)).unwrap();
        let err = refinement_study(&problem, &motion, &[4, 8], 16, &tight(8), Some(2)).unwrap_err();
        assert!(err.is_discretization(), "{err}");
    }

    #[test]
    fn stability_ratios_and_determinism() {
        let problem = ProblemData::new(
            3.0,
            Forcing::Zero,
            InitialDatum::Cosine { amplitude: 1.0, wavenumber: 1.0, offset: 0.0 },
        )
        .unwrap();
        let rule = gauss_legendre_rule(default_order(6), 1).unwrap();
        let basis = BasisSet::legendre(1, 6, &rule).unwrap();
        let motion = DomainMotion::from_config(MotionFamily::stationary(1, 0.5)).unwrap();
        let r = stability_experiment(&problem, &basis, &motion, &[1e-2, 1e-3, 1e-4], &tight(64)).unwrap();
        assert!(r.zero_identical);
        assert!(r.pass(), "{r:?}");
        // Static domain: the flow contracts in L².
        assert!(r.rows.iter().all(|row| row.ratio <= 1.0 + 1e-6));
        assert_eq!(r.gronwall_rate, 0.0);
    }

    #[test]
    fn mass_stays_positive_definite() {
        let rule = gauss_legendre_rule(default_order(8), 1).unwrap();
        let basis = BasisSet::legendre(1, 8, &rule).unwrap();
        let motion = DomainMotion::from_config(MotionFamily::dilation(1, 0.3, 1.0, [0.5, 0.5], 2.0 * PI)).unwrap();
        let asm = Assembler::new(&basis, &motion).unwrap();
        let rows = uniform_pd(&asm, &motion.sample_times(32)).unwrap();
        assert!(rows.iter().all(|r| r.min_eigenvalue >= 0.7 - 1e-9));
    }
}
