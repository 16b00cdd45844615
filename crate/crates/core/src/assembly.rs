//! Galerkin system on the moving domain, assembled by pullback to `Ω₀`.
//!
//! With `w_k^t = w_k^0 ∘ Φ_t⁻¹` every integral over `Ω_t` becomes an integral
//! over `Ω₀` weighted by `J_t`, and physical gradients are
//! `∇w_k^t ∘ Φ_t = (∇Φ_t)⁻¹ ∇w_k^0`. The semidiscrete system reads
//! `M(t) α' + γ(α, t) + B(t) α = f(t)` with
//!
//! * `M_kl = ∫ w_k w_l`
//! * `B_kl = ∫ (v_Ω·∇w_k + w_k div v_Ω) w_l`
//! * `γ_k  = ∫ |∇u_α|^{p−2} ∇u_α · ∇w_k`
//! * `f_k  = ∫ f w_k`

use nalgebra::{DMatrix, DVector, Vector2};

use crate::basis::{BasisSet, BasisTable};
use crate::error::{MoplaError, Result};
use crate::geometry::{DomainMotion, Point};
use crate::parallel::{reduce_blocks, thread_count};
use crate::problem::Forcing;

/// Pulled-back geometry at every quadrature node for one time.
#[derive(Debug, Clone)]
pub struct NodeFrame {
    pub t: f64,
    /// `weight · J_t`.
    pub wj: Vec<f64>,
    /// `∂_tΦ_t(X) = v_Ω(Φ_t(X), t)`.
    pub velocity: Vec<Vector2<f64>>,
    /// `(div v_Ω) ∘ Φ_t`.
    pub divergence: Vec<f64>,
    /// `Φ_t(X)`.
    pub physical: Vec<Point>,
    /// `∇w_k^t ∘ Φ_t`, node-major.
    pub gradients: Vec<Vector2<f64>>,
    n: usize,
}

impl NodeFrame {
    pub fn len(&self) -> usize {
        self.wj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wj.is_empty()
    }

    #[inline]
    pub fn gradients_at(&self, node: usize) -> &[Vector2<f64>] {
        &self.gradients[node * self.n..(node + 1) * self.n]
    }
}

#[derive(Debug, Clone)]
pub struct SystemSnapshot {
    pub t: f64,
    pub mass: DMatrix<f64>,
    pub transport: DMatrix<f64>,
    pub load: DVector<f64>,
    pub frame: NodeFrame,
}

pub struct Assembler<'a> {
    basis: &'a BasisSet,
    motion: &'a DomainMotion,
    threads: usize,
}

/// `|g|^{p−2} g`, with `|0|^{p−2} = 0` for `p > 2`.
#[inline]
pub fn p_flux(g: &Vector2<f64>, p: f64) -> Vector2<f64> {
    if p == 2.0 {
        return *g;
    }
    let norm = g.norm();
    if norm == 0.0 {
        Vector2::zeros()
    } else {
        g * norm.powf(p - 2.0)
    }
}

impl<'a> Assembler<'a> {
    pub fn new(basis: &'a BasisSet, motion: &'a DomainMotion) -> Result<Self> {
        if basis.dim() != motion.dim() {
            return Err(MoplaError::config(
                "dim",
                format!("basis dimension {} does not match motion dimension {}", basis.dim(), motion.dim()),
            ));
        }
        Ok(Assembler {
            basis,
            motion,
            threads: thread_count(),
        })
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn basis(&self) -> &BasisSet {
        self.basis
    }

    pub fn motion(&self) -> &DomainMotion {
        self.motion
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    fn table(&self) -> &BasisTable {
        self.basis.table()
    }

    pub fn frame(&self, t: f64) -> Result<NodeFrame> {
        let rule = self.basis.rule();
        let table = self.table();
        let n = self.size();
        let q = rule.len();
        let mut frame = NodeFrame {
            t,
            wj: Vec::with_capacity(q),
            velocity: Vec::with_capacity(q),
            divergence: Vec::with_capacity(q),
            physical: Vec::with_capacity(q),
            gradients: Vec::with_capacity(q * n),
            n,
        };
        for (node, (x, w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let g = self.motion.map_gradient(x, t);
            let ginv = g
                .try_inverse()
                .ok_or_else(|| self.motion.degenerate(x, t, "singular ∇Φ_t at quadrature node"))?;
            let jac = self.motion.jacobian_det(x, t);
            frame.wj.push(w * jac);
            frame.velocity.push(self.motion.reference_velocity(x, t));
            frame
                .divergence
                .push((ginv * self.motion.reference_velocity_gradient(x, t)).trace());
            frame.physical.push(self.motion.map_point(x, t));
            frame
                .gradients
                .extend(table.gradients_at(node).iter().map(|dg| ginv * dg));
        }
        Ok(frame)
    }

    fn reduce_matrix<F>(&self, frame: &NodeFrame, kernel: F) -> DMatrix<f64>
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let n = self.size();
        let partial = reduce_blocks(
            frame.len(),
            self.threads,
            |range| {
                let mut acc = vec![0.0; n * n];
                for node in range {
                    kernel(node, &mut acc);
                }
                acc
            },
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
        .unwrap_or_else(|| vec![0.0; n * n]);
        DMatrix::from_row_slice(n, n, &partial)
    }

    fn reduce_vector<F>(&self, frame: &NodeFrame, kernel: F) -> DVector<f64>
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let n = self.size();
        let partial = reduce_blocks(
            frame.len(),
            self.threads,
            |range| {
                let mut acc = vec![0.0; n];
                for node in range {
                    kernel(node, &mut acc);
                }
                acc
            },
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
        .unwrap_or_else(|| vec![0.0; n]);
        DVector::from_vec(partial)
    }

    pub fn mass_from(&self, frame: &NodeFrame) -> DMatrix<f64> {
        let n = self.size();
        let table = self.table();
        let upper = self.reduce_matrix(frame, |node, acc| {
            let v = table.values_at(node);
            let wj = frame.wj[node];
            for k in 0..n {
                let wk = wj * v[k];
                for l in k..n {
                    acc[k * n + l] += wk * v[l];
                }
            }
        });
        DMatrix::from_fn(n, n, |k, l| if k <= l { upper[(k, l)] } else { upper[(l, k)] })
    }

    /// `S_kl = ∫_{Ω_t} ∇w_k · ∇w_l`.
    pub fn stiffness_from(&self, frame: &NodeFrame) -> DMatrix<f64> {
        let n = self.size();
        let upper = self.reduce_matrix(frame, |node, acc| {
            let g = frame.gradients_at(node);
            let wj = frame.wj[node];
            for k in 0..n {
                for l in k..n {
                    acc[k * n + l] += wj * g[k].dot(&g[l]);
                }
            }
        });
        DMatrix::from_fn(n, n, |k, l| if k <= l { upper[(k, l)] } else { upper[(l, k)] })
    }

    pub fn transport_from(&self, frame: &NodeFrame) -> DMatrix<f64> {
        let n = self.size();
        let table = self.table();
        self.reduce_matrix(frame, |node, acc| {
            let v = table.values_at(node);
            let g = frame.gradients_at(node);
            let wj = frame.wj[node];
            let vel = frame.velocity[node];
            let div = frame.divergence[node];
            for k in 0..n {
                let row = wj * (vel.dot(&g[k]) + v[k] * div);
                if row == 0.0 {
                    continue;
                }
                for l in 0..n {
                    acc[k * n + l] += row * v[l];
                }
            }
        })
    }

    pub fn load_from(&self, frame: &NodeFrame, forcing: &Forcing) -> Result<DVector<f64>> {
        let n = self.size();
        if forcing.is_zero() {
            return Ok(DVector::zeros(n));
        }
        let rule = self.basis.rule();
        let mut values = Vec::with_capacity(frame.len());
        for (node, x) in rule.nodes().iter().enumerate() {
            let f = forcing.eval(x, &frame.physical[node], frame.t);
            if !f.is_finite() {
                return Err(MoplaError::Input(format!(
                    "forcing is not finite at X = ({}, {}), t = {}",
                    x[0], x[1], frame.t
                )));
            }
            values.push(f);
        }
        let table = self.table();
        Ok(self.reduce_vector(frame, |node, acc| {
            let v = table.values_at(node);
            let wf = frame.wj[node] * values[node];
            for k in 0..n {
                acc[k] += wf * v[k];
            }
        }))
    }

    /// Physical gradient of `u_α` at a node.
    #[inline]
    pub fn solution_gradient(&self, frame: &NodeFrame, node: usize, alpha: &DVector<f64>) -> Vector2<f64> {
        frame
            .gradients_at(node)
            .iter()
            .zip(alpha.iter())
            .fold(Vector2::zeros(), |acc, (g, a)| acc + g * *a)
    }

    pub fn plaplacian_from(&self, frame: &NodeFrame, alpha: &DVector<f64>, p: f64) -> DVector<f64> {
        let n = self.size();
        self.reduce_vector(frame, |node, acc| {
            let grad = self.solution_gradient(frame, node, alpha);
            let flux = p_flux(&grad, p) * frame.wj[node];
            if flux == Vector2::zeros() {
                return;
            }
            for (a, g) in acc.iter_mut().zip(frame.gradients_at(node)).take(n) {
                *a += flux.dot(g);
            }
        })
    }

    /// `∂γ_k/∂α_l = ∫ |∇u|^{p−2} (∇w_k·∇w_l) + (p−2)|∇u|^{p−4}(∇u·∇w_k)(∇u·∇w_l)`.
    pub fn plaplacian_jacobian_from(&self, frame: &NodeFrame, alpha: &DVector<f64>, p: f64) -> DMatrix<f64> {
        let n = self.size();
        self.reduce_matrix(frame, |node, acc| {
            let grad = self.solution_gradient(frame, node, alpha);
            let norm = grad.norm();
            let (iso, dir) = if p == 2.0 {
                (1.0, 0.0)
            } else if norm == 0.0 {
                (0.0, 0.0)
            } else {
                let m = norm.powf(p - 2.0);
                (m, (p - 2.0) * m)
            };
            if iso == 0.0 {
                return;
            }
            let wj = frame.wj[node];
            let g = frame.gradients_at(node);
            let unit = if norm > 0.0 { grad / norm } else { Vector2::zeros() };
            for k in 0..n {
                let gk = unit.dot(&g[k]);
                for l in 0..n {
                    acc[k * n + l] += wj * (iso * g[k].dot(&g[l]) + dir * gk * unit.dot(&g[l]));
                }
            }
        })
    }

    pub fn assemble_mass(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.mass_from(&self.frame(t)?))
    }

    pub fn assemble_transport(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.transport_from(&self.frame(t)?))
    }

    pub fn assemble_stiffness(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.stiffness_from(&self.frame(t)?))
    }

    pub fn assemble_plaplacian(&self, alpha: &DVector<f64>, t: f64, p: f64) -> Result<DVector<f64>> {
        Ok(self.plaplacian_from(&self.frame(t)?, alpha, p))
    }

    pub fn assemble_load(&self, forcing: &Forcing, t: f64) -> Result<DVector<f64>> {
        self.load_from(&self.frame(t)?, forcing)
    }

    pub fn snapshot(&self, forcing: &Forcing, t: f64) -> Result<SystemSnapshot> {
        let frame = self.frame(t)?;
        Ok(SystemSnapshot {
            t,
            mass: self.mass_from(&frame),
            transport: if self.motion.is_static() {
                DMatrix::zeros(self.size(), self.size())
            } else {
                self.transport_from(&frame)
            },
            load: self.load_from(&frame, forcing)?,
            frame,
        })
    }

    /// `g(α, t) = M⁻¹ [f − γ(α) − B α]`.
    pub fn rhs(&self, snapshot: &SystemSnapshot, alpha: &DVector<f64>, p: f64) -> Result<DVector<f64>> {
        let gamma = self.plaplacian_from(&snapshot.frame, alpha, p);
        let rhs = &snapshot.load - gamma - &snapshot.transport * alpha;
        solve_mass(&snapshot.mass, rhs, snapshot.t)
    }
}

/// Cholesky solve with the mass matrix; on failure reports the smallest eigenvalue.
pub fn solve_mass(mass: &DMatrix<f64>, rhs: DVector<f64>, t: f64) -> Result<DVector<f64>> {
    match mass.clone().cholesky() {
        Some(chol) => Ok(chol.solve(&rhs)),
        None => Err(MoplaError::SingularMass {
            t,
            min_eigenvalue: mass.clone().symmetric_eigenvalues().min(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MotionFamily;
    use crate::quadrature::{gauss_legendre_rule, default_order};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn basis(dim: usize, n: usize) -> BasisSet {
        let rule = gauss_legendre_rule(default_order(n), dim).unwrap();
        BasisSet::legendre(dim, n, &rule).unwrap()
    }

    fn dilation(dim: usize) -> DomainMotion {
        DomainMotion::from_config(MotionFamily::dilation(dim, 0.3, 1.0, [0.5, 0.5], 2.0 * PI)).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Legendre stiffness on the static box, assembled directly from raw
    /// derivatives without the pullback machinery.
    fn direct_stiffness(n: usize) -> DMatrix<f64> {
        let rule = gauss_legendre_rule(2 * n + 4, 1).unwrap();
        let dw = |k: usize, x: f64| {
            let (_, d) = crate::quadrature::legendre_with_derivative(k, 2.0 * x - 1.0);
            2.0 * d * (2.0 * k as f64 + 1.0).sqrt()
        };
        DMatrix::from_fn(n, n, |k, l| rule.integrate(|x| dw(k, x[0]) * dw(l, x[0])))
    }

    #[test]
    fn mass_is_identity_at_t0_and_for_static_motion() {
        let b = basis(2, 10);
        let moving = dilation(2);
        let a = Assembler::new(&b, &moving).unwrap();
        let m = a.assemble_mass(0.0).unwrap();
        assert!((m - DMatrix::<f64>::identity(10, 10)).amax() <= 1e-10);

        let still = DomainMotion::from_config(MotionFamily::stationary(2, 1.0)).unwrap();
        let a = Assembler::new(&b, &still).unwrap();
        let m = a.assemble_mass(0.7).unwrap();
        assert!((m - DMatrix::<f64>::identity(10, 10)).amax() <= 1e-10);
        assert_eq!(a.assemble_transport(0.7).unwrap().amax(), 0.0);
    }

    #[test]
    fn single_mode_values() {
        let b = basis(1, 1);
        let m = dilation(1);
        let a = Assembler::new(&b, &m).unwrap();
        assert_abs_diff_eq!(a.assemble_mass(PI / 2.0).unwrap()[(0, 0)], 1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(a.assemble_transport(0.0).unwrap()[(0, 0)], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(a.assemble_load(&Forcing::Constant(1.0), PI / 2.0).unwrap()[0], 1.3, epsilon = 1e-14);
        let alpha = DVector::from_element(1, 0.8);
        assert_eq!(a.assemble_plaplacian(&alpha, 0.3, 3.0).unwrap()[0], 0.0);

        // g = −(d|Ω_t|/dt / |Ω_t|) α for a single constant mode
        for t in [0.0, 0.4, 1.9] {
            let snap = a.snapshot(&Forcing::Zero, t).unwrap();
            let g = a.rhs(&snap, &alpha, 3.0).unwrap();
            let jac = 1.0 + 0.3 * t.sin();
            assert_abs_diff_eq!(g[0], -(0.3 * t.cos() / jac) * 0.8, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_inputs() {
        let b = basis(1, 6);
        let m = dilation(1);
        let a = Assembler::new(&b, &m).unwrap();
        assert_eq!(a.assemble_plaplacian(&DVector::zeros(6), 0.2, 3.0).unwrap().amax(), 0.0);
        assert_eq!(a.assemble_load(&Forcing::Zero, 0.2).unwrap().amax(), 0.0);
        let still = DomainMotion::from_config(MotionFamily::stationary(1, 1.0)).unwrap();
        let a = Assembler::new(&b, &still).unwrap();
        let l = a.assemble_load(&Forcing::Constant(1.0), 0.5).unwrap();
        assert_abs_diff_eq!(l[0], 1.0, epsilon = 1e-14);
        let snap = a.snapshot(&Forcing::Zero, 0.0).unwrap();
        assert_eq!(a.rhs(&snap, &DVector::zeros(6), 3.0).unwrap().amax(), 0.0);
    }

    #[test]
    fn non_finite_forcing_is_reported() {
        let b = basis(1, 3);
        let m = dilation(1);
        let a = Assembler::new(&b, &m).unwrap();
        let bad = Forcing::Custom(std::sync::Arc::new(|x: &Point, _: &Point, _| 1.0 / (x[0] - x[0])));
        assert!(matches!(a.assemble_load(&bad, 0.1), Err(MoplaError::Input(_))));
    }

    #[test]
    fn heat_operator_matches_direct_stiffness() {
        let n = 9;
        let b = basis(1, n);
        let still = DomainMotion::from_config(MotionFamily::stationary(1, 1.0)).unwrap();
        let a = Assembler::new(&b, &still).unwrap();
        let k = direct_stiffness(n);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let alpha = random_vec(&mut rng, n);
            let gamma = a.assemble_plaplacian(&alpha, 0.3, 2.0).unwrap();
            let expected = &k * &alpha;
            assert!((&gamma - &expected).amax() <= 1e-10 * expected.amax().max(1.0));
            let snap = a.snapshot(&Forcing::Zero, 0.3).unwrap();
            let g = a.rhs(&snap, &alpha, 2.0).unwrap();
            assert!((g + &expected).amax() <= 1e-10 * expected.amax().max(1.0));
        }
    }

    /// For the one-dimensional dilation the physical domain is an interval
    /// with a closed-form inverse map, so `γ` can be assembled directly on
    /// `Ω_t` with its own Gauss rule.
    #[test]
    fn pullback_matches_direct_physical_quadrature() {
        let n = 7;
        let b = basis(1, n);
        let (amp, omega, xc) = (0.3, 1.3, 0.35);
        let m = DomainMotion::from_config(MotionFamily::dilation(1, amp, omega, [xc, 0.5], 2.0)).unwrap();
        let a = Assembler::new(&b, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in [0.2, 0.9, 1.7] {
            let s = 1.0 + amp * (omega * t).sin();
            let (lo, hi) = (xc - s * xc, xc + s * (1.0 - xc));
            let inverse = |x: f64| xc + (x - xc) / s;
            let (nodes, weights) = crate::quadrature::gauss_legendre_1d(b.rule().order());
            for p in [2.0, 3.0] {
                let alpha = random_vec(&mut rng, n);
                let pull = a.assemble_plaplacian(&alpha, t, p).unwrap();
                let mut direct = DVector::zeros(n);
                for (y, w) in nodes.iter().zip(&weights) {
                    let x = lo + (hi - lo) * 0.5 * (y + 1.0);
                    let wx = w * 0.5 * (hi - lo);
                    let big_x = Vector2::new(inverse(x), 0.0);
                    let dw: Vec<f64> = (0..n).map(|k| b.gradient(k, &big_x)[0] / s).collect();
                    let du: f64 = dw.iter().zip(alpha.iter()).map(|(d, a)| d * a).sum();
                    let flux = du.abs().powf(p - 2.0) * du;
                    for k in 0..n {
                        direct[k] += wx * flux * dw[k];
                    }
                }
                assert!((pull - direct).amax() <= 1e-9, "t {t} p {p}");
            }
        }
    }

    #[test]
    fn coercivity_and_symmetry() {
        let b = basis(1, 16);
        let m = dilation(1);
        let c0 = m.bounds().c0;
        let a = Assembler::new(&b, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..32 {
            let t = 2.0 * PI * i as f64 / 31.0;
            let mass = a.assemble_mass(t).unwrap();
            assert!((&mass - mass.transpose()).amax() <= 1e-12);
            for _ in 0..32 {
                let alpha = random_vec(&mut rng, 16);
                assert!(alpha.dot(&(&mass * &alpha)) >= (c0 - 1e-8) * alpha.norm_squared());
            }
        }
    }

    #[test]
    fn dissipation_pairing_and_monotonicity() {
        let b = basis(2, 10);
        let m = DomainMotion::from_config(MotionFamily::shear(0.4, 2.0, [0.5, 0.5], 1.0)).unwrap();
        let a = Assembler::new(&b, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [2.0, 2.5, 3.0, 4.0] {
            let frame = a.frame(0.6).unwrap();
            for _ in 0..50 {
                let alpha = random_vec(&mut rng, 10);
                let beta = random_vec(&mut rng, 10);
                let ga = a.plaplacian_from(&frame, &alpha, p);
                let gb = a.plaplacian_from(&frame, &beta, p);
                let pairing = ga.dot(&alpha);
                let direct: f64 = (0..frame.len())
                    .map(|q| frame.wj[q] * a.solution_gradient(&frame, q, &alpha).norm().powf(p))
                    .sum();
                assert!(pairing >= 0.0);
                assert!((pairing - direct).abs() <= 1e-10 * direct.max(1.0));
                assert!((ga - gb).dot(&(&alpha - &beta)) >= -1e-10);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let b = basis(1, 6);
        let m = dilation(1);
        let a = Assembler::new(&b, &m).unwrap();
        let frame = a.frame(0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [2.0, 3.0, 4.5] {
            let alpha = random_vec(&mut rng, 6);
            let jac = a.plaplacian_jacobian_from(&frame, &alpha, p);
            let h = 1e-6;
            for l in 0..6 {
                let mut up = alpha.clone();
                up[l] += h;
                let mut down = alpha.clone();
                down[l] -= h;
                let col = (a.plaplacian_from(&frame, &up, p) - a.plaplacian_from(&frame, &down, p)) / (2.0 * h);
                for k in 0..6 {
                    assert!((jac[(k, l)] - col[k]).abs() <= 1e-5 * jac.amax().max(1.0), "p {p}");
                }
            }
        }
    }

    #[test]
    fn thread_count_is_bit_reproducible() {
        let b = basis(2, 12);
        let m = dilation(2);
        let alpha = DVector::from_fn(12, |i, _| (i as f64 * 0.37).sin());
        let one = Assembler::new(&b, &m).unwrap().with_threads(1);
        let four = Assembler::new(&b, &m).unwrap().with_threads(4);
        let s1 = one.snapshot(&Forcing::Constant(0.5), 0.4).unwrap();
        let s4 = four.snapshot(&Forcing::Constant(0.5), 0.4).unwrap();
        assert_eq!(s1.mass, s4.mass);
        assert_eq!(s1.transport, s4.transport);
        assert_eq!(one.rhs(&s1, &alpha, 3.0).unwrap(), four.rhs(&s4, &alpha, 3.0).unwrap());
    }

    #[test]
    fn rhs_residual_is_small() {
        let b = basis(1, 10);
        let m = dilation(1);
        let a = Assembler::new(&b, &m).unwrap();
        let alpha = DVector::from_fn(10, |i, _| 1.0 / (1.0 + i as f64));
        let snap = a.snapshot(&Forcing::Constant(0.3), 1.1).unwrap();
        let g = a.rhs(&snap, &alpha, 3.0).unwrap();
        let target = &snap.load - a.plaplacian_from(&snap.frame, &alpha, 3.0) - &snap.transport * &alpha;
        assert!((&snap.mass * g - &target).amax() <= 1e-10 * target.amax().max(1.0));
    }
}
