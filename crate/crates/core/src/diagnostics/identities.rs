//! Identities satisfied along a Galerkin trajectory.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector2};

use super::cumulative_simpson;
use crate::assembly::{Assembler, NodeFrame};
use crate::basis::BasisSet;
use crate::error::{MoplaError, Result};
use crate::geometry::Side;
use crate::integrator::GalerkinTrajectory;
use crate::problem::ProblemData;

fn grid_step(traj: &GalerkinTrajectory) -> f64 {
    let t = traj.times();
    if t.len() < 2 {
        0.0
    } else {
        t[1] - t[0]
    }
}

fn forcing_at_nodes(asm: &Assembler<'_>, problem: &ProblemData, frame: &NodeFrame) -> Vec<f64> {
    if problem.forcing.is_zero() {
        return vec![0.0; frame.len()];
    }
    asm.basis()
        .rule()
        .nodes()
        .iter()
        .zip(&frame.physical)
        .map(|(x, y)| problem.forcing.eval(x, y, frame.t))
        .collect()
}

fn values_at_nodes(asm: &Assembler<'_>, alpha: &DVector<f64>) -> Vec<f64> {
    let table = asm.basis().table();
    (0..table.node_count())
        .map(|q| table.values_at(q).iter().zip(alpha.iter()).map(|(v, a)| v * a).sum())
        .collect()
}

/// Spatial integrals needed by the mass and energy identities at one time.
struct Instant {
    mass: f64,
    load_mass: f64,
    norm_sq: f64,
    grad_pp: f64,
    f_u: f64,
    u_vgrad: f64,
    u2_div: f64,
}

fn instant(asm: &Assembler<'_>, problem: &ProblemData, t: f64, alpha: &DVector<f64>) -> Result<Instant> {
    let frame = asm.frame(t)?;
    let f = forcing_at_nodes(asm, problem, &frame);
    let u = values_at_nodes(asm, alpha);
    let mut out = Instant {
        mass: 0.0,
        load_mass: 0.0,
        norm_sq: 0.0,
        grad_pp: 0.0,
        f_u: 0.0,
        u_vgrad: 0.0,
        u2_div: 0.0,
    };
    for q in 0..frame.len() {
        let wj = frame.wj[q];
        let grad = asm.solution_gradient(&frame, q, alpha);
        out.mass += wj * u[q];
        out.load_mass += wj * f[q];
        out.norm_sq += wj * u[q] * u[q];
        out.grad_pp += wj * grad.norm().powf(problem.p);
        out.f_u += wj * f[q] * u[q];
        out.u_vgrad += wj * u[q] * frame.velocity[q].dot(&grad);
        out.u2_div += wj * u[q] * u[q] * frame.divergence[q];
    }
    Ok(out)
}

fn instants(asm: &Assembler<'_>, problem: &ProblemData, traj: &GalerkinTrajectory) -> Result<Vec<Instant>> {
    traj.times()
        .iter()
        .zip(traj.states())
        .map(|(&t, a)| instant(asm, problem, t, a))
        .collect()
}

/// `m(t) = (u_N, 1)` against `m(0) + ∫₀ᵗ (f, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub forcing_integral: Vec<f64>,
    pub residual: Vec<f64>,
}

impl MassSeries {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn mass_identity(asm: &Assembler<'_>, problem: &ProblemData, traj: &GalerkinTrajectory) -> Result<MassSeries> {
    let inst = instants(asm, problem, traj)?;
    Ok(mass_from(traj, &inst))
}

fn mass_from(traj: &GalerkinTrajectory, inst: &[Instant]) -> MassSeries {
    let mass: Vec<f64> = inst.iter().map(|i| i.mass).collect();
    let load: Vec<f64> = inst.iter().map(|i| i.load_mass).collect();
    let forcing_integral = cumulative_simpson(grid_step(traj), &load);
    let residual = mass
        .iter()
        .zip(&forcing_integral)
        .map(|(m, fi)| m - mass[0] - fi)
        .collect();
    MassSeries {
        times: traj.times().to_vec(),
        mass,
        forcing_integral,
        residual,
    }
}

/// Terms of `½‖u(t)‖² + ∫₀ᵗ‖∇u‖_p^p = ½‖u(0)‖² + I₁ + I₂ + I₃` with
/// `I₁ = ∫(f,u)`, `I₂ = −∫(u, v·∇u)`, `I₃ = −½∫(u², div v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub norm_sq: Vec<f64>,
    pub grad_pp: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i3: Vec<f64>,
    pub residual: Vec<f64>,
    /// Richardson estimate of the Simpson error in the time integrals,
    /// from the same sums on every other grid point.
    pub time_error_estimate: f64,
}

impl EnergySeries {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `sup_t ‖u(t)‖² + ∫₀ᵗ‖∇u‖_p^p`.
    pub fn bound(&self) -> f64 {
        self.norm_sq
            .iter()
            .zip(&self.dissipation)
            .fold(0.0, |m, (a, b)| m.max(a + b))
    }

    /// Largest increase of `‖u(t)‖` between consecutive grid times.
    pub fn max_norm_increase(&self) -> f64 {
        self.norm_sq
            .windows(2)
            .fold(0.0, |m, w| m.max(w[1].max(0.0).sqrt() - w[0].max(0.0).sqrt()))
    }
}

pub fn energy_identity(asm: &Assembler<'_>, problem: &ProblemData, traj: &GalerkinTrajectory) -> Result<EnergySeries> {
    let inst = instants(asm, problem, traj)?;
    Ok(energy_from(traj, &inst))
}

/// Both series from one pass over the trajectory.
pub fn mass_and_energy(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    traj: &GalerkinTrajectory,
) -> Result<(MassSeries, EnergySeries)> {
    let inst = instants(asm, problem, traj)?;
    Ok((mass_from(traj, &inst), energy_from(traj, &inst)))
}

fn energy_from(traj: &GalerkinTrajectory, inst: &[Instant]) -> EnergySeries {
    let h = grid_step(traj);
    let col = |f: fn(&Instant) -> f64| inst.iter().map(f).collect::<Vec<f64>>();
    let norm_sq = col(|i| i.norm_sq);
    let grad_pp = col(|i| i.grad_pp);
    let dissipation = cumulative_simpson(h, &grad_pp);
    let i1 = cumulative_simpson(h, &col(|i| i.f_u));
    let i2: Vec<f64> = cumulative_simpson(h, &col(|i| i.u_vgrad)).iter().map(|x| -x).collect();
    let i3: Vec<f64> = cumulative_simpson(h, &col(|i| i.u2_div)).iter().map(|x| -0.5 * x).collect();
    let residual = (0..inst.len())
        .map(|k| 0.5 * norm_sq[k] + dissipation[k] - 0.5 * norm_sq[0] - i1[k] - i2[k] - i3[k])
        .collect();
    let balance: Vec<f64> = inst
        .iter()
        .map(|i| i.grad_pp - i.f_u + i.u_vgrad + 0.5 * i.u2_div)
        .collect();
    let fine = cumulative_simpson(h, &balance);
    let coarse_values: Vec<f64> = balance.iter().step_by(2).copied().collect();
    let coarse = cumulative_simpson(2.0 * h, &coarse_values);
    let time_error_estimate = coarse
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (j, c)| m.max((fine[2 * j] - c).abs() / 15.0));
    EnergySeries {
        times: traj.times().to_vec(),
        norm_sq,
        grad_pp,
        dissipation,
        i1,
        i2,
        i3,
        residual,
        time_error_estimate,
    }
}

/// `½∫₀ᵗ‖∂•u_N‖² ds` and `(1/2p)‖∇u_N(t)‖_p^p`, with
/// `∂•u_N = Σ α_k' w_k^t` since the pushed-forward basis is transported.
#[derive(Debug, Clone, PartialEq)]
pub struct HiEnSeries {
    pub times: Vec<f64>,
    pub rate_sq: Vec<f64>,
    pub rate_integral: Vec<f64>,
    pub grad_term: Vec<f64>,
    pub total: Vec<f64>,
}

impl HiEnSeries {
    pub fn sup(&self) -> f64 {
        self.total.iter().fold(0.0, |m, v| m.max(*v))
    }
}

pub fn material_derivative_energy(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    traj: &GalerkinTrajectory,
) -> Result<HiEnSeries> {
    let mut rate_sq = Vec::with_capacity(traj.len());
    let mut grad_term = Vec::with_capacity(traj.len());
    for (&t, alpha) in traj.times().iter().zip(traj.states()) {
        let snap = asm.snapshot(&problem.forcing, t)?;
        let rate = asm.rhs(&snap, alpha, problem.p)?;
        rate_sq.push(rate.dot(&(&snap.mass * &rate)));
        let gpp: f64 = (0..snap.frame.len())
            .map(|q| snap.frame.wj[q] * asm.solution_gradient(&snap.frame, q, alpha).norm().powf(problem.p))
            .sum();
        grad_term.push(gpp / (2.0 * problem.p));
    }
    let rate_integral: Vec<f64> = cumulative_simpson(grid_step(traj), &rate_sq)
        .iter()
        .map(|x| 0.5 * x)
        .collect();
    let total = rate_integral.iter().zip(&grad_term).map(|(a, b)| a + b).collect();
    Ok(HiEnSeries {
        times: traj.times().to_vec(),
        rate_sq,
        rate_integral,
        grad_term,
        total,
    })
}

/// `θ(t) = sin²(πt/T)` and its derivative.
pub fn sin2_window(horizon: f64) -> impl Fn(f64) -> (f64, f64) {
    move |t| {
        let s = (PI * t / horizon).sin();
        (s * s, PI / horizon * (2.0 * PI * t / horizon).sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    pub value: f64,
    /// Sum of the absolute sizes of the individual terms.
    pub scale: f64,
    /// Whether the test function lies in the span of the solution basis.
    pub in_span: bool,
}

/// Space-time weak form tested with `ψ(t) = θ(t) Σ c_k w_k^t`:
///
/// `∫₀ᵀ −θ'(u,w) + θ[(|∇u|^{p−2}∇u, ∇w) + (u, v·∇w) − (f, w)] dt`.
///
/// The `div v` contributions of `∂_t(u,ψ)` and of the boundary term cancel,
/// so no time derivative of `u` is needed.
pub fn weak_form_residual<W>(
    asm: &Assembler<'_>,
    problem: &ProblemData,
    traj: &GalerkinTrajectory,
    test_basis: &BasisSet,
    coeffs: &DVector<f64>,
    window: W,
) -> Result<WeakResidual>
where
    W: Fn(f64) -> (f64, f64),
{
    if coeffs.len() != test_basis.size() {
        return Err(MoplaError::Input(format!(
            "test function has {} coefficients, test basis has {}",
            coeffs.len(),
            test_basis.size()
        )));
    }
    if test_basis.dim() != asm.basis().dim() {
        return Err(MoplaError::Input("test basis dimension differs from solution basis".into()));
    }
    let horizon = traj.horizon();
    let (start, _) = window(traj.times()[0]);
    let (end, _) = window(horizon);
    if start.abs() > 1e-12 || end.abs() > 1e-12 {
        return Err(MoplaError::Input(format!(
            "time window must vanish at both ends (θ(0) = {start:e}, θ(T) = {end:e})"
        )));
    }
    let rule = asm.basis().rule();
    let table = test_basis.tabulate(rule);
    let motion = asm.motion();
    let in_span = coeffs.iter().skip(asm.size()).all(|c| *c == 0.0)
        && (0..asm.size().min(test_basis.size()))
            .all(|k| test_basis.raw().get(k) == asm.basis().raw().get(k));

    let mut integrand = Vec::with_capacity(traj.len());
    let mut magnitude = Vec::with_capacity(traj.len());
    for (&t, alpha) in traj.times().iter().zip(traj.states()) {
        let frame = asm.frame(t)?;
        let f = forcing_at_nodes(asm, problem, &frame);
        let u = values_at_nodes(asm, alpha);
        let (theta, dtheta) = window(t);
        let (mut uw, mut flux, mut transport, mut load) = (0.0, 0.0, 0.0, 0.0);
        for (q, x) in rule.nodes().iter().enumerate() {
            let ginv = motion
                .map_gradient(x, t)
                .try_inverse()
                .ok_or_else(|| motion.degenerate(x, t, "singular ∇Φ_t"))?;
            let w: f64 = table.values_at(q).iter().zip(coeffs.iter()).map(|(v, c)| v * c).sum();
            let dw: Vector2<f64> = ginv
                * table
                    .gradients_at(q)
                    .iter()
                    .zip(coeffs.iter())
                    .fold(Vector2::zeros(), |acc, (g, c)| acc + g * *c);
            let grad = asm.solution_gradient(&frame, q, alpha);
            let wj = frame.wj[q];
            uw += wj * u[q] * w;
            flux += wj * crate::assembly::p_flux(&grad, problem.p).dot(&dw);
            transport += wj * u[q] * frame.velocity[q].dot(&dw);
            load += wj * f[q] * w;
        }
        integrand.push(-dtheta * uw + theta * (flux + transport - load));
        magnitude.push((dtheta * uw).abs() + theta * (flux.abs() + transport.abs() + load.abs()));
    }
    let h = grid_step(traj);
    Ok(WeakResidual {
        value: cumulative_simpson(h, &integrand).last().copied().unwrap_or(0.0),
        scale: cumulative_simpson(h, &magnitude).last().copied().unwrap_or(0.0),
        in_span,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

impl BoundaryRow {
    pub fn max_abs(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }
}

/// `|∂_x u|^{p−2}∂_x u·ν + V_Ω u` at the two endpoints of `Ω_t`.
pub fn boundary_residual_1d(
    basis: &BasisSet,
    motion: &crate::geometry::DomainMotion,
    p: f64,
    traj: &GalerkinTrajectory,
    times: &[f64],
) -> Result<Vec<BoundaryRow>> {
    if motion.dim() != 1 || basis.dim() != 1 {
        return Err(MoplaError::UnsupportedDimension {
            operation: "boundary_residual_1d",
            dim: motion.dim(),
        });
    }
    let n = basis.size();
    let mut values = vec![0.0; n];
    let mut grads = vec![Vector2::zeros(); n];
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let alpha = traj.state_at(t)?;
        let mut residual = [0.0; 2];
        for (slot, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let x = side.reference_point();
            basis.evaluate(&x, &mut values, &mut grads);
            let g00 = motion.map_gradient(&x, t)[(0, 0)];
            let u: f64 = values.iter().zip(alpha.iter()).map(|(v, a)| v * a).sum();
            let ux: f64 = grads.iter().zip(alpha.iter()).map(|(g, a)| g[0] * a).sum::<f64>() / g00;
            let flux = crate::problem::signed_power(ux, p - 1.0);
            residual[slot] = flux * side.normal() + motion.boundary_normal_velocity(side, t)? * u;
        }
        rows.push(BoundaryRow {
            t,
            left: residual[0],
            right: residual[1],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainMotion, MotionFamily};
    use crate::integrator::{integrate, OdeSettings};
    use crate::problem::{Forcing, InitialDatum};
    use crate::quadrature::{default_order, gauss_legendre_rule};
    use approx::assert_abs_diff_eq;

    fn basis(dim: usize, n: usize) -> BasisSet {
        let rule = gauss_legendre_rule(default_order(n), dim).unwrap();
        BasisSet::legendre(dim, n, &rule).unwrap()
    }

    fn settings() -> OdeSettings {
        OdeSettings { rtol: 1e-10, atol: 1e-10, stride: 256, ..OdeSettings::default() }
    }

    fn cosine() -> InitialDatum {
        InitialDatum::Cosine { amplitude: 1.0, wavenumber: 1.0, offset: 0.3 }
    }

    #[test]
    fn zero_run_has_zero_terms() {
        let b = basis(1, 4);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, 0.3, 1.0, [0.5, 0.5], 1.0)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Zero, InitialDatum::Zero).unwrap();
        let traj = integrate(&problem, &b, &m, &settings()).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        let (mass, energy) = mass_and_energy(&asm, &problem, &traj).unwrap();
        assert_eq!(mass.max_residual(), 0.0);
        assert_eq!(energy.max_residual(), 0.0);
        assert_eq!(energy.bound(), 0.0);
        let hi = material_derivative_energy(&asm, &problem, &traj).unwrap();
        assert_eq!(hi.sup(), 0.0);
        let w = weak_form_residual(&asm, &problem, &traj, &b, &DVector::from_element(4, 1.0), sin2_window(1.0)).unwrap();
        assert_eq!(w.value, 0.0);
        let rows = boundary_residual_1d(&b, &m, 3.0, &traj, &[0.0, 0.5]).unwrap();
        assert!(rows.iter().all(|r| r.max_abs() == 0.0));
    }

    #[test]
    fn constant_forcing_on_static_domain_adds_mass_linearly() {
        let b = basis(1, 5);
        let m = DomainMotion::from_config(MotionFamily::stationary(1, 1.0)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Constant(1.0), cosine()).unwrap();
        let traj = integrate(&problem, &b, &m, &settings()).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        let mass = mass_identity(&asm, &problem, &traj).unwrap();
        for (t, mt) in mass.times.iter().zip(&mass.mass) {
            assert_abs_diff_eq!(*mt, mass.mass[0] + t, epsilon = 1e-8);
        }
        assert!(mass.max_residual() <= 1e-8);
    }

    #[test]
    fn moving_domain_identities() {
        let b = basis(1, 6);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, 0.3, 2.0, [0.4, 0.5], 1.0)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Oscillating { amplitude: 0.5, omega: 2.0 }, cosine()).unwrap();
        let traj = integrate(&problem, &b, &m, &OdeSettings { stride: 2048, ..settings() }).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        let (mass, energy) = mass_and_energy(&asm, &problem, &traj).unwrap();
        assert!(mass.max_residual() <= 1e-8, "{}", mass.max_residual());
        assert!(energy.max_residual() <= 1e-6, "{}", energy.max_residual());
        assert!(energy.time_error_estimate <= 1e-6);
        assert!(energy.i2.iter().any(|x| x.abs() > 1e-6));
        assert!(energy.i3.iter().any(|x| x.abs() > 1e-6));
    }

    #[test]
    fn static_dissipation() {
        let b = basis(1, 6);
        let m = DomainMotion::from_config(MotionFamily::stationary(1, 0.5)).unwrap();
        let problem = ProblemData::new(4.0, Forcing::Zero, cosine()).unwrap();
        // The initial layer of the p = 4 flow needs a fine output grid for Simpson.
        let traj = integrate(&problem, &b, &m, &OdeSettings { stride: 4096, ..settings() }).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        let energy = energy_identity(&asm, &problem, &traj).unwrap();
        assert!(energy.i2.iter().chain(&energy.i3).all(|x| *x == 0.0));
        assert!(energy.max_residual() <= 1e-6);
        assert!(energy.max_norm_increase() <= 1e-10);
    }

    /// For one constant mode on the dilating interval, `α = α₀/J`, so
    /// `‖∂•u‖² = α₀² J'²/J³`.
    #[test]
    fn single_mode_material_derivative() {
        let b = basis(1, 1);
        let (a, omega, horizon) = (0.3, 1.0, std::f64::consts::PI);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, a, omega, [0.5, 0.5], horizon)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Zero, InitialDatum::Constant(1.0)).unwrap();
        let traj = integrate(&problem, &b, &m, &settings()).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        let hi = material_derivative_energy(&asm, &problem, &traj).unwrap();
        let rule = gauss_legendre_rule(60, 1).unwrap();
        let exact = 0.5
            * horizon
            * rule.integrate(|x| {
                let s = x[0] * horizon;
                let jac = 1.0 + a * (omega * s).sin();
                let djac = a * omega * (omega * s).cos();
                djac * djac / jac.powi(3)
            });
        assert_abs_diff_eq!(*hi.rate_integral.last().unwrap(), exact, epsilon = 1e-6);
        assert!(hi.grad_term.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn weak_form_in_and_out_of_span() {
        let n = 6;
        let b = basis(1, n);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, 0.3, 2.0, [0.5, 0.5], 1.0)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Zero, cosine()).unwrap();
        let traj = integrate(&problem, &b, &m, &settings()).unwrap();
        let asm = Assembler::new(&b, &m).unwrap();
        for k in 0..n {
            let mut c = DVector::zeros(n);
            c[k] = 1.0;
            let r = weak_form_residual(&asm, &problem, &traj, &b, &c, sin2_window(1.0)).unwrap();
            assert!(r.in_span);
            assert!(r.value.abs() <= 1e-6, "k {k}: {}", r.value);
        }
        let bigger = BasisSet::legendre(1, n + 2, b.rule()).unwrap();
        let mut c = DVector::zeros(n + 2);
        c[n + 1] = 1.0;
        let r = weak_form_residual(&asm, &problem, &traj, &bigger, &c, sin2_window(1.0)).unwrap();
        assert!(!r.in_span);
        assert!(r.value.is_finite());
        let bad = weak_form_residual(&asm, &problem, &traj, &b, &DVector::from_element(n, 1.0), |t: f64| (t.cos(), -t.sin()));
        assert!(matches!(bad, Err(MoplaError::Input(_))));
    }

    #[test]
    fn boundary_residual_rejects_2d_and_sees_velocity() {
        let b2 = basis(2, 3);
        let m2 = DomainMotion::from_config(MotionFamily::stationary(2, 1.0)).unwrap();
        let problem = ProblemData::new(3.0, Forcing::Zero, InitialDatum::Constant(1.0)).unwrap();
        let traj = integrate(&problem, &b2, &m2, &OdeSettings { stride: 4, ..settings() }).unwrap();
        assert!(matches!(
            boundary_residual_1d(&b2, &m2, 3.0, &traj, &[0.0]),
            Err(MoplaError::UnsupportedDimension { .. })
        ));

        let b = basis(1, 1);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, 0.3, 1.0, [0.5, 0.5], 1.0)).unwrap();
        let traj = integrate(&problem, &b, &m, &OdeSettings { stride: 4, ..settings() }).unwrap();
        let rows = boundary_residual_1d(&b, &m, 3.0, &traj, &[0.0]).unwrap();
        // u = 1, flux 0, V = ±0.15 at t = 0.
        assert_abs_diff_eq!(rows[0].left, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].right, 0.15, epsilon = 1e-12);
    }
}
