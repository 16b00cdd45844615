//! Tensor Gauss–Legendre rules on the reference box.

use nalgebra::Vector2;

use crate::error::{MoplaError, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    order: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{[0,1]^n} f dX`.
    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre_1d(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = std::f64::consts::PI * (4 * i + 3) as f64 / (4 * n + 2) as f64;
        let nf = n as f64;
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf.powi(3))) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut d_prev = 0.0;
    let mut d = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Tensor rule on `[0,1]^dim` with `order` points per axis. Exact for
/// tensor polynomials of per-axis degree `≤ 2·order − 1`.
pub fn gauss_legendre_rule(order: usize, dim: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(MoplaError::config("quad.order", "must be >= 1"));
    }
    if dim != 1 && dim != 2 {
        return Err(MoplaError::config("dim", "must be 1 or 2"));
    }
    let (x, w) = gauss_legendre_1d(order);
    let x: Vec<f64> = x.iter().map(|xi| 0.5 * (xi + 1.0)).collect();
    let w: Vec<f64> = w.iter().map(|wi| 0.5 * wi).collect();
    let (nodes, weights) = if dim == 1 {
        (x.iter().map(|&xi| Vector2::new(xi, 0.0)).collect(), w)
    } else {
        let mut nodes = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for j in 0..order {
            for i in 0..order {
                nodes.push(Vector2::new(x[i], x[j]));
                weights.push(w[i] * w[j]);
            }
        }
        (nodes, weights)
    };
    Ok(QuadratureRule {
        dim,
        order,
        nodes,
        weights,
    })
}

/// Default points per axis for a basis of `n` functions.
pub fn default_order(n: usize) -> usize {
    (2 * n).max(8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre_rule(1, 1).unwrap();
        assert_eq!(r.nodes()[0][0], 0.5);
        assert_eq!(r.weights(), &[1.0]);
        assert_abs_diff_eq!(r.integrate(|x| 3.0 * x[0] + 1.0), 2.5, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_is_exact_to_degree_three() {
        let r = gauss_legendre_rule(2, 1).unwrap();
        assert_abs_diff_eq!(r.integrate(|x| x[0].powi(3)), 0.25, epsilon = 1e-15);
        let r2 = gauss_legendre_rule(2, 2).unwrap();
        assert_abs_diff_eq!(r2.integrate(|x| (x[0] * x[1]).powi(3)), 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_positive_and_sum_to_one() {
        for order in 1..=40 {
            for dim in 1..=2 {
                let r = gauss_legendre_rule(order, dim).unwrap();
                assert!(r.weights().iter().all(|&w| w > 0.0));
                let total: f64 = r.weights().iter().sum();
                assert!((total - 1.0).abs() <= 1e-13, "order {order} dim {dim}: {total}");
            }
        }
    }

    #[test]
    fn exactness_degree() {
        for order in 1..=24 {
            let r = gauss_legendre_rule(order, 1).unwrap();
            for deg in 0..=(2 * order - 1) {
                let exact = 1.0 / (deg as f64 + 1.0);
                let approx = r.integrate(|x| x[0].powi(deg as i32));
                assert!((approx - exact).abs() <= 1e-13, "order {order} deg {deg}");
            }
        }
    }

    #[test]
    fn zero_order_is_rejected() {
        assert!(gauss_legendre_rule(0, 1).is_err());
    }
}
