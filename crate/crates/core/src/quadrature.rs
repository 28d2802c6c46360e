//! Composite Gauss–Legendre quadrature with panel doubling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` split into `panels` equal pieces.
    pub fn integrate_composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> f64 {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * width;
            let mut acc = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(mid + half * x);
            }
            total += acc * half;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Controls for the refined quadrature used by the orbit integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureOptions {
    /// Stop when successive estimates differ by less than this, relatively.
    pub tolerance: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: usize,
    /// Gauss–Legendre order per panel.
    pub order: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_refinements: 10,
            order: 16,
        }
    }
}

/// Result of a refined quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Relative change of the last doubling.
    pub relative_change: f64,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two
/// consecutive estimates agree to `opts.tolerance` relative.
pub fn integrate_refined<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureEstimate> {
    let rule = GaussLegendre::new(opts.order.max(2));
    let mut panels = 1;
    let mut previous = rule.integrate_composite(&f, a, b, panels);
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_refinements {
        panels *= 2;
        let current = rule.integrate_composite(&f, a, b, panels);
        let scale = current.abs().max(f64::MIN_POSITIVE);
        change = (current - previous).abs() / scale;
        if !current.is_finite() {
            break;
        }
        if change < opts.tolerance {
            return Ok(QuadratureEstimate {
                value: current,
                relative_change: change,
                panels,
            });
        }
        previous = current;
    }
    Err(ConeError::QuadratureNotConverged {
        refinements: opts.max_refinements,
        change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        for n in [1, 2, 5, 16, 33] {
            let rule = GaussLegendre::new(n);
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n={n} sum={sum}");
            for (a, b) in rule.nodes().iter().zip(rule.nodes().iter().rev()) {
                assert!((a + b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(6);
        for deg in 0..12 {
            let got = rule.integrate_composite(&|x: f64| x.powi(deg), -1.0, 1.0, 1);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((got - exact).abs() < 1e-14, "deg={deg}");
        }
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        let rule = GaussLegendre::new(3);
        let x = (0.6f64).sqrt();
        assert!((rule.nodes()[2] - x).abs() < 1e-15);
        assert!((rule.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((rule.weights()[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn refined_integral_of_smooth_function() {
        let est = integrate_refined(|x: f64| x.sin(), 0.0, PI, &QuadratureOptions::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadratureOptions {
            tolerance: 1e-14,
            max_refinements: 2,
            order: 2,
        };
        let res = integrate_refined(|x: f64| x.abs().sqrt(), -1.0, 1.0, &opts);
        assert!(matches!(res, Err(ConeError::QuadratureNotConverged { .. })));
    }
}
