//! Randomized probes of the vector and functional inequalities.

use nalgebra::{DVector, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{sample_rng, stream};
use crate::assembly::Assembler;
use crate::error::{MoplaError, Result};
use crate::geometry::MotionBounds;

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(MoplaError::config("p", format!("p must be ≥ 2 (got {p})")));
    }
    Ok(())
}

fn check_samples(samples: usize, field: &str) -> Result<()> {
    if samples == 0 {
        return Err(MoplaError::config(field, "sample count must be >= 1"));
    }
    Ok(())
}

/// Random vector whose magnitude spans several decades.
fn random_vector(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    DVector::from_fn(k, |_, _| scale * rng.random_range(-1.0..1.0))
}

/// Pair `(a, b)` for sample `i`; a few pairs are nearly equal or have `b = 0`.
fn random_pair(seed: u64, probe: u64, i: usize, k: usize) -> (DVector<f64>, DVector<f64>) {
    let mut rng = sample_rng(seed, probe, i as u64);
    let a = random_vector(&mut rng, k);
    let b = match rng.random_range(0..20) {
        0 => DVector::zeros(k),
        1 | 2 => &a + random_vector(&mut rng, k) * 1e-6,
        _ => random_vector(&mut rng, k),
    };
    (a, b)
}

fn flux(a: &DVector<f64>, p: f64) -> DVector<f64> {
    let n = a.norm();
    if n == 0.0 {
        a.clone()
    } else {
        a * n.powf(p - 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorProbeReport {
    pub formula: &'static str,
    pub p: f64,
    pub samples: usize,
    pub violations: usize,
    /// Most negative `(rhs − lhs) / max(1, scale)` seen.
    pub min_slack: f64,
    /// Largest observed `lhs / rhs` for the Lipschitz bound (0 for monotonicity).
    pub max_ratio: f64,
    pub tolerance: f64,
}

impl VectorProbeReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// `(|a|^{p−2}a − |b|^{p−2}b)·(a − b) ≥ 0`.
pub fn monotonicity_probe(p: f64, samples: usize, k: usize, seed: u64, tol: f64) -> Result<VectorProbeReport> {
    check_p(p)?;
    check_samples(samples, "diag.vector_samples")?;
    let mut report = VectorProbeReport {
        formula: super::formula::MONOTONICITY,
        p,
        samples,
        violations: 0,
        min_slack: f64::INFINITY,
        max_ratio: 0.0,
        tolerance: tol,
    };
    for i in 0..samples {
        let (a, b) = random_pair(seed, stream::MONOTONICITY, i, k);
        let diff = &a - &b;
        let value = (flux(&a, p) - flux(&b, p)).dot(&diff);
        let scale = (a.norm().powf(p - 1.0) + b.norm().powf(p - 1.0)) * diff.norm();
        let slack = value / scale.max(1.0);
        report.min_slack = report.min_slack.min(slack);
        if slack < -tol {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Explicit constant `2^{p−2}(p−1)` of the Lipschitz-type bound.
pub fn plip_constant(p: f64) -> f64 {
    2f64.powf(p - 2.0) * (p - 1.0)
}

/// `||a|^{p−2}a − |b|^{p−2}b| ≤ 2^{p−2}(p−1)(|a|^{p−2} + |b|^{p−2})|a − b|`.
pub fn plip_probe(p: f64, samples: usize, k: usize, seed: u64, tol: f64) -> Result<VectorProbeReport> {
    check_p(p)?;
    check_samples(samples, "diag.vector_samples")?;
    let c = plip_constant(p);
    let mut report = VectorProbeReport {
        formula: super::formula::P_LIPSCHITZ,
        p,
        samples,
        violations: 0,
        min_slack: f64::INFINITY,
        max_ratio: 0.0,
        tolerance: tol,
    };
    for i in 0..samples {
        let (a, b) = random_pair(seed, stream::P_LIPSCHITZ, i, k);
        let lhs = (flux(&a, p) - flux(&b, p)).norm();
        let rhs = c * (a.norm().powf(p - 2.0) + b.norm().powf(p - 2.0)) * (&a - &b).norm();
        let slack = (rhs - lhs) / rhs.max(1.0);
        report.min_slack = report.min_slack.min(slack);
        if rhs > 0.0 {
            report.max_ratio = report.max_ratio.max(lhs / rhs * c);
        }
        if slack < -tol {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `c_δ = σ^{−2q/p} |Ω_t| / q` with `σ = pδ/2` and `2/p + 1/q = 1`.
pub fn lp_l2_constant(p: f64, delta: f64, volume: f64) -> Result<f64> {
    check_p(p)?;
    if p == 2.0 {
        return Err(MoplaError::config("p", "the Lp-L2 interpolation probe needs p > 2"));
    }
    if !(delta > 0.0) {
        return Err(MoplaError::config("diag.delta", "must be > 0"));
    }
    let q = p / (p - 2.0);
    let sigma = p * delta / 2.0;
    Ok(sigma.powf(-2.0 * q / p) * volume / q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpL2Row {
    pub t: f64,
    pub volume: f64,
    pub c_delta: f64,
    /// Largest `‖u‖² − δ‖u‖_p^p − c_δ` over the samples (≤ 0 expected).
    pub max_excess: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpL2Report {
    pub p: f64,
    pub delta: f64,
    pub samples: usize,
    pub rows: Vec<LpL2Row>,
    pub tolerance: f64,
}

impl LpL2Report {
    pub fn violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }

    pub fn pass(&self) -> bool {
        self.violations() == 0
    }
}

fn random_coefficients(seed: u64, probe: u64, i: usize, n: usize) -> DVector<f64> {
    let mut rng = sample_rng(seed, probe, i as u64);
    random_vector(&mut rng, n)
}

/// `‖u‖²_{L²(Ω_t)} ≤ δ‖u‖^p_{L^p(Ω_t)} + c_δ` for random basis combinations.
pub fn lp_l2_probe(
    p: f64,
    delta: f64,
    asm: &Assembler<'_>,
    times: &[f64],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LpL2Report> {
    check_samples(samples, "diag.function_samples")?;
    lp_l2_constant(p, delta, 1.0)?;
    let n = asm.size();
    let table = asm.basis().table();
    let coeffs: Vec<DVector<f64>> = (0..samples)
        .map(|i| random_coefficients(seed, stream::LP_L2, i, n))
        .collect();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let frame = asm.frame(t)?;
        let volume: f64 = frame.wj.iter().sum();
        let c_delta = lp_l2_constant(p, delta, volume)?;
        let mut row = LpL2Row {
            t,
            volume,
            c_delta,
            max_excess: f64::NEG_INFINITY,
            violations: 0,
        };
        for alpha in &coeffs {
            let (mut l2, mut lp) = (0.0, 0.0);
            for q in 0..frame.len() {
                let u: f64 = table.values_at(q).iter().zip(alpha.iter()).map(|(v, a)| v * a).sum();
                l2 += frame.wj[q] * u * u;
                lp += frame.wj[q] * u.abs().powf(p);
            }
            let excess = l2 - delta * lp - c_delta;
            row.max_excess = row.max_excess.max(excess);
            if excess > tol * l2.max(1.0) {
                row.violations += 1;
            }
        }
        rows.push(row);
    }
    Ok(LpL2Report {
        p,
        delta,
        samples,
        rows,
        tolerance: tol,
    })
}

/// `‖u − ū‖_{L^q} / ‖∇u‖_{L^q}` from nodal values, gradients and weights;
/// `None` when the gradient vanishes.
pub fn poincare_quotient(weights: &[f64], values: &[f64], gradients: &[Vector2<f64>], q: f64) -> Option<f64> {
    let volume: f64 = weights.iter().sum();
    let mean = weights.iter().zip(values).map(|(w, u)| w * u).sum::<f64>() / volume;
    let num: f64 = weights.iter().zip(values).map(|(w, u)| w * (u - mean).abs().powf(q)).sum();
    let den: f64 = weights.iter().zip(gradients).map(|(w, g)| w * g.norm().powf(q)).sum();
    let scale = values.iter().fold(0.0f64, |m, u| m.max(u.abs()));
    if den <= (1e-14 * scale.max(1e-300)).powf(q) {
        None
    } else {
        Some((num / den).powf(1.0 / q))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareRow {
    pub t: f64,
    pub constant: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareReport {
    pub q: f64,
    pub samples: usize,
    pub rows: Vec<PoincareRow>,
    /// Guaranteed distortion `(c₁/c₀)·c₂` of the constant under the pullback.
    pub pullback_factor: f64,
}

impl PoincareReport {
    pub fn max_constant(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.constant))
    }

    pub fn variation(&self) -> f64 {
        let lo = self.rows.iter().fold(f64::INFINITY, |m, r| m.min(r.constant));
        self.max_constant() / lo
    }

    pub fn pass(&self) -> bool {
        let v = self.variation();
        v.is_finite() && v <= 10.0
    }

    /// Whether every `ĉ(t)` stays within the pullback factor of `ĉ(t₀)`.
    pub fn within_pullback_factor(&self) -> bool {
        let c0 = self.rows[0].constant;
        self.rows
            .iter()
            .all(|r| r.constant <= c0 * self.pullback_factor * (1.0 + 1e-9) && r.constant * self.pullback_factor * (1.0 + 1e-9) >= c0)
    }
}

/// Empirical uniform Poincaré constant over random mean-free basis combinations.
pub fn poincare_probe(q: f64, asm: &Assembler<'_>, times: &[f64], samples: usize, seed: u64) -> Result<PoincareReport> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(MoplaError::config("diag.q", "must be >= 1"));
    }
    check_samples(samples, "diag.function_samples")?;
    if times.is_empty() {
        return Err(MoplaError::config("diag.t_grid", "must be >= 1"));
    }
    let n = asm.size();
    let table = asm.basis().table();
    let coeffs: Vec<DVector<f64>> = (0..samples)
        .map(|i| random_coefficients(seed, stream::POINCARE, i, n))
        .collect();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let frame = asm.frame(t)?;
        let mut row = PoincareRow {
            t,
            constant: 0.0,
            excluded: 0,
        };
        for alpha in &coeffs {
            let values: Vec<f64> = (0..frame.len())
                .map(|k| table.values_at(k).iter().zip(alpha.iter()).map(|(v, a)| v * a).sum())
                .collect();
            let grads: Vec<Vector2<f64>> = (0..frame.len()).map(|k| asm.solution_gradient(&frame, k, alpha)).collect();
            match poincare_quotient(&frame.wj, &values, &grads, q) {
                Some(c) => row.constant = row.constant.max(c),
                None => row.excluded += 1,
            }
        }
        rows.push(row);
    }
    let b = asm.motion().bounds();
    Ok(PoincareReport {
        q,
        samples,
        rows,
        pullback_factor: b.c1 / b.c0 * b.c2,
    })
}

/// Constant of the pulled-back Friedrichs inequality from the motion
/// bounds: `max(1, C_H) / c₀` with `C_H = max(c₁ + 2 g_J²/c₀, 2 c₁ c₂²)`,
/// `g_J = sup|∇J|`.
pub fn friedrichs_pullback_constant(bounds: &MotionBounds) -> f64 {
    let g = bounds.grad_jacobian_max;
    let ch = (bounds.c1 + 2.0 * g * g / bounds.c0).max(2.0 * bounds.c1 * bounds.c2 * bounds.c2);
    ch.max(1.0) / bounds.c0
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedrichsRow {
    pub t: f64,
    /// Minimal `K` valid for every sample at this time (`size + 1` if none).
    pub k_min: usize,
    /// Whether the `K` found at `t = 0` is valid at this time.
    pub holds_with_k0: bool,
    /// Smallest relative slack with `K = K₀`.
    pub slack_k0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedrichsReport {
    pub epsilon: f64,
    pub c: f64,
    pub fine_size: usize,
    pub samples: usize,
    pub k0: usize,
    pub rows: Vec<FriedrichsRow>,
    /// `max |‖ψ‖² − Σ_{k≤K}(ψ,w_k)²|` at `t = 0` over in-span `ψ`, `c = 1`.
    pub parseval_slack: f64,
}

impl FriedrichsReport {
    pub fn inconclusive(&self) -> bool {
        self.k0 > self.fine_size || self.rows.iter().any(|r| r.k_min > self.fine_size)
    }

    pub fn uniform(&self) -> bool {
        self.rows.iter().all(|r| r.holds_with_k0)
    }

    pub fn pass(&self) -> bool {
        !self.inconclusive() && self.uniform()
    }
}

struct FriedrichsSample {
    lhs: f64,
    h1: f64,
    partial: Vec<f64>,
}

impl FriedrichsSample {
    fn holds(&self, k: usize, c: f64, eps: f64) -> bool {
        self.slack(k, c, eps) >= -1e-12
    }

    fn slack(&self, k: usize, c: f64, eps: f64) -> f64 {
        (c * (self.partial[k] + eps * self.h1) - self.lhs) / self.lhs.max(1e-300)
    }
}

/// `‖ψ‖² ≤ c(Σ_{k≤K}|(ψ, w_k^t)|² + ε‖ψ‖²_{H¹})` for `ψ` in the span of the
/// assembler's (fine) basis. Samples are random coefficient vectors plus every
/// unit vector.
pub fn friedrichs_probe(
    epsilon: f64,
    c: Option<f64>,
    asm: &Assembler<'_>,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<FriedrichsReport> {
    if !(epsilon > 0.0) {
        return Err(MoplaError::config("diag.epsilon", "must be > 0"));
    }
    let c = c.unwrap_or_else(|| friedrichs_pullback_constant(asm.motion().bounds()));
    if !(c > 0.0 && c.is_finite()) {
        return Err(MoplaError::config("diag.friedrichs_c", "must be > 0"));
    }
    let n = asm.size();
    let mut coeffs: Vec<DVector<f64>> = (0..samples)
        .map(|i| random_coefficients(seed, stream::FRIEDRICHS, i, n))
        .collect();
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        coeffs.push(e);
    }

    let evaluate = |t: f64| -> Result<Vec<FriedrichsSample>> {
        let frame = asm.frame(t)?;
        let mass = asm.mass_from(&frame);
        let stiff = asm.stiffness_from(&frame);
        Ok(coeffs
            .iter()
            .map(|beta| {
                let mb = &mass * beta;
                let lhs = beta.dot(&mb);
                let h1 = lhs + beta.dot(&(&stiff * beta));
                let mut partial = Vec::with_capacity(n + 1);
                partial.push(0.0);
                for k in 0..n {
                    partial.push(partial[k] + mb[k] * mb[k]);
                }
                FriedrichsSample { lhs, h1, partial }
            })
            .collect())
    };
    let minimal_k = |set: &[FriedrichsSample]| {
        set.iter()
            .map(|s| (0..=n).find(|&k| s.holds(k, c, epsilon)).unwrap_or(n + 1))
            .max()
            .unwrap_or(0)
    };

    let initial = evaluate(0.0)?;
    let k0 = minimal_k(&initial);

    // Parseval at t = 0 with c = 1 for in-span ψ: truncate every sample to
    // its first K coefficients.
    let frame0 = asm.frame(0.0)?;
    let mass0 = asm.mass_from(&frame0);
    let mut parseval_slack: f64 = 0.0;
    for beta in coeffs.iter().take(samples.max(1).min(coeffs.len())) {
        for k in 1..=n {
            let mut trunc = beta.clone();
            trunc.rows_mut(k, n - k).fill(0.0);
            let mb = &mass0 * &trunc;
            let lhs = trunc.dot(&mb);
            let proj: f64 = mb.iter().take(k).map(|x| x * x).sum();
            parseval_slack = parseval_slack.max((lhs - proj).abs() / lhs.max(1e-300));
        }
    }

    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let set = if t == 0.0 { None } else { Some(evaluate(t)?) };
        let set = set.as_deref().unwrap_or(&initial);
        let k_min = minimal_k(set);
        let kk = k0.min(n);
        let slack_k0 = set.iter().fold(f64::INFINITY, |m, s| m.min(s.slack(kk, c, epsilon)));
        rows.push(FriedrichsRow {
            t,
            k_min,
            holds_with_k0: k0 <= n && set.iter().all(|s| s.holds(k0, c, epsilon)),
            slack_k0,
        });
    }
    Ok(FriedrichsReport {
        epsilon,
        c,
        fine_size: n,
        samples: coeffs.len(),
        k0,
        rows,
        parseval_slack,
    })
}
