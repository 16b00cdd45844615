//! Orthonormal reference basis on `Ω₀ = [0,1]^n`.
//!
//! The raw family is tensor shifted-Legendre in graded lexicographic order,
//! constant first. [`orthonormalize`] runs modified Gram–Schmidt with one
//! reorthogonalization pass in the discrete `L²(Ω₀)` inner product of a
//! quadrature rule and records the resulting lower-triangular change of
//! basis, so the orthonormal functions can be evaluated anywhere.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{MoplaError, Result};
use crate::geometry::Point;
use crate::quadrature::{default_order, gauss_legendre_rule, legendre_with_derivative, QuadratureRule};

const PIVOT_FLOOR: f64 = 1e-12;

/// A raw (not yet orthonormalized) tensor-product function on `[0,1]^2`.
/// In one dimension the second degree is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawFunction {
    /// `P_i(2x−1) P_j(2y−1)`.
    Legendre([usize; 2]),
    /// `x^i y^j`.
    Monomial([usize; 2]),
}

impl RawFunction {
    pub fn degrees(&self) -> [usize; 2] {
        match *self {
            RawFunction::Legendre(d) | RawFunction::Monomial(d) => d,
        }
    }

    pub fn max_degree(&self) -> usize {
        let [i, j] = self.degrees();
        i.max(j)
    }

    fn factor(&self, n: usize, x: f64) -> (f64, f64) {
        match self {
            RawFunction::Legendre(_) => {
                let (p, d) = legendre_with_derivative(n, 2.0 * x - 1.0);
                (p, 2.0 * d)
            }
            RawFunction::Monomial(_) => {
                if n == 0 {
                    (1.0, 0.0)
                } else {
                    (x.powi(n as i32), n as f64 * x.powi(n as i32 - 1))
                }
            }
        }
    }

    pub fn value_and_gradient(&self, x: &Point) -> (f64, Vector2<f64>) {
        let [i, j] = self.degrees();
        let (fx, dfx) = self.factor(i, x[0]);
        let (fy, dfy) = self.factor(j, x[1]);
        (fx * fy, Vector2::new(dfx * fy, fx * dfy))
    }
}

/// Graded lexicographic tensor-Legendre family with `n` members.
pub fn raw_basis(dim: usize, n: usize) -> Result<Vec<RawFunction>> {
    if n == 0 {
        return Err(MoplaError::config("basis.N", "must be >= 1"));
    }
    match dim {
        1 => Ok((0..n).map(|k| RawFunction::Legendre([k, 0])).collect()),
        2 => {
            let mut out = Vec::with_capacity(n);
            let mut total = 0;
            while out.len() < n {
                for i in (0..=total).rev() {
                    if out.len() == n {
                        break;
                    }
                    out.push(RawFunction::Legendre([i, total - i]));
                }
                total += 1;
            }
            Ok(out)
        }
        _ => Err(MoplaError::config("dim", "must be 1 or 2")),
    }
}

/// Basis values and gradients tabulated at the nodes of one rule,
/// stored node-major (`index = node * n + k`).
#[derive(Debug, Clone)]
pub struct BasisTable {
    n: usize,
    values: Vec<f64>,
    gradients: Vec<Vector2<f64>>,
}

impl BasisTable {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.values.len().checked_div(self.n).unwrap_or(0)
    }

    #[inline]
    pub fn values_at(&self, node: usize) -> &[f64] {
        &self.values[node * self.n..(node + 1) * self.n]
    }

    #[inline]
    pub fn gradients_at(&self, node: usize) -> &[Vector2<f64>] {
        &self.gradients[node * self.n..(node + 1) * self.n]
    }
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    dim: usize,
    raw: Vec<RawFunction>,
    /// Row `k` holds the raw-family coefficients of `w_{k+1}^0`.
    change: DMatrix<f64>,
    rule: QuadratureRule,
    table: BasisTable,
}

/// Orthonormalizes `raw` in the discrete `L²(Ω₀)` inner product of `rule`.
pub fn orthonormalize(raw: &[RawFunction], rule: &QuadratureRule) -> Result<BasisSet> {
    let n = raw.len();
    if n == 0 {
        return Err(MoplaError::config("basis.N", "must be >= 1"));
    }
    let weights = rule.weights();
    let q = rule.len();
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(weights)
            .map(|((x, y), w)| w * x * y)
            .sum()
    };

    let raw_values: Vec<Vec<f64>> = raw
        .iter()
        .map(|f| rule.nodes().iter().map(|x| f.value_and_gradient(x).0).collect())
        .collect();

    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut change = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let mut v = raw_values[k].clone();
        let mut c = DVector::<f64>::zeros(n);
        c[k] = 1.0;
        let original = inner(&v, &v).sqrt();
        for _pass in 0..2 {
            for (j, qj) in ortho.iter().enumerate() {
                let r = inner(&v, qj);
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= r * qi;
                }
                for m in 0..=j {
                    c[m] -= r * change[(j, m)];
                }
            }
        }
        let norm = inner(&v, &v).sqrt();
        let pivot = if original > 0.0 { norm / original } else { 0.0 };
        if !(pivot >= PIVOT_FLOOR) {
            return Err(MoplaError::RankDeficient { index: k + 1, pivot });
        }
        v.iter_mut().for_each(|vi| *vi /= norm);
        for m in 0..=k {
            change[(k, m)] = c[m] / norm;
        }
        ortho.push(v);
    }
    debug_assert_eq!(ortho.first().map(Vec::len), Some(q));

    let mut basis = BasisSet {
        dim: rule.dim(),
        raw: raw.to_vec(),
        change,
        rule: rule.clone(),
        table: BasisTable {
            n,
            values: Vec::new(),
            gradients: Vec::new(),
        },
    };
    basis.table = basis.tabulate(rule);
    Ok(basis)
}

impl BasisSet {
    /// Orthonormal tensor-Legendre basis of size `n` on its own rule.
    /// Basis of size `n` on a Gauss rule of the given order (default
    /// [`default_order`] of `n`).
    pub fn with_order(dim: usize, n: usize, order: Option<usize>) -> Result<Self> {
        let rule = gauss_legendre_rule(order.unwrap_or_else(|| default_order(n)), dim)?;
        Self::legendre(dim, n, &rule)
    }

    pub fn legendre(dim: usize, n: usize, rule: &QuadratureRule) -> Result<Self> {
        orthonormalize(&raw_basis(dim, n)?, rule)
    }

    pub fn size(&self) -> usize {
        self.raw.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn raw(&self) -> &[RawFunction] {
        &self.raw
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    pub fn change_of_basis(&self) -> &DMatrix<f64> {
        &self.change
    }

    /// All values `w_k^0(x)` and gradients `∇w_k^0(x)`.
    pub fn evaluate(&self, x: &Point, values: &mut [f64], gradients: &mut [Vector2<f64>]) {
        let n = self.size();
        let raw: Vec<(f64, Vector2<f64>)> =
            self.raw.iter().map(|f| f.value_and_gradient(x)).collect();
        for k in 0..n {
            let mut v = 0.0;
            let mut g = Vector2::zeros();
            for (m, (rv, rg)) in raw.iter().enumerate().take(k + 1) {
                let c = self.change[(k, m)];
                v += c * rv;
                g += rg * c;
            }
            values[k] = v;
            gradients[k] = g;
        }
    }

    pub fn value(&self, k: usize, x: &Point) -> f64 {
        (0..=k)
            .map(|m| self.change[(k, m)] * self.raw[m].value_and_gradient(x).0)
            .sum()
    }

    pub fn gradient(&self, k: usize, x: &Point) -> Vector2<f64> {
        (0..=k)
            .map(|m| self.raw[m].value_and_gradient(x).1 * self.change[(k, m)])
            .sum()
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> BasisTable {
        let n = self.size();
        let mut values = vec![0.0; rule.len() * n];
        let mut gradients = vec![Vector2::zeros(); rule.len() * n];
        for (q, x) in rule.nodes().iter().enumerate() {
            self.evaluate(
                x,
                &mut values[q * n..(q + 1) * n],
                &mut gradients[q * n..(q + 1) * n],
            );
        }
        BasisTable {
            n,
            values,
            gradients,
        }
    }

    /// `Σ_k coeffs_k w_k^0(x)`.
    pub fn reconstruct(&self, coeffs: &DVector<f64>, x: &Point) -> f64 {
        let n = self.size();
        let mut values = vec![0.0; n];
        let mut gradients = vec![Vector2::zeros(); n];
        self.evaluate(x, &mut values, &mut gradients);
        values.iter().zip(coeffs.iter()).map(|(v, c)| v * c).sum()
    }

    /// Gram matrix of the basis under `rule`.
    pub fn gram(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let table = self.tabulate(rule);
        let n = self.size();
        let mut gram = DMatrix::zeros(n, n);
        for (q, w) in rule.weights().iter().enumerate() {
            let v = table.values_at(q);
            for k in 0..n {
                for l in 0..n {
                    gram[(k, l)] += w * v[k] * v[l];
                }
            }
        }
        gram
    }
}

/// Coefficients `(u0, w_k^0)_{L²(Ω₀)}` computed with the basis' own rule.
pub fn project_initial<F>(u0: F, basis: &BasisSet) -> Result<DVector<f64>>
where
    F: Fn(&Point) -> f64,
{
    let rule = basis.rule();
    let table = basis.table();
    let n = basis.size();
    let mut coeffs = DVector::zeros(n);
    for (q, (x, w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let u = u0(x);
        if !u.is_finite() {
            return Err(MoplaError::Input(format!(
                "initial datum is not finite at X = ({}, {})",
                x[0], x[1]
            )));
        }
        for (c, v) in coeffs.iter_mut().zip(table.values_at(q)) {
            *c += w * u * v;
        }
    }
    Ok(coeffs)
}
