//! Gauss–Legendre rules on panels aligned with breakpoints.

use serde::{Deserialize, Serialize};

use crate::piecewise::merge_breaks;

/// Per-axis quadrature resolution: `order` Gauss points on each panel, and
/// every interval between consecutive breakpoints split into `refine`
/// equal panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub order: usize,
    pub refine: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { order: 8, refine: 1 }
    }
}

impl QuadratureSpec {
    pub fn new(order: usize, refine: usize) -> Self {
        QuadratureSpec { order, refine }
    }

    pub fn with_refine(self, refine: usize) -> Self {
        QuadratureSpec { refine, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.order >= 1 && self.refine >= 1
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
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
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite one-dimensional rule: flattened nodes and weights.
#[derive(Clone, Debug, Default)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// Composite rule over `[lo, hi]` whose panels never straddle any of
    /// `breaks`.
    pub fn aligned(breaks: &[f64], lo: f64, hi: f64, spec: QuadratureSpec) -> Rule1D {
        let panels = panels(breaks, lo, hi, spec.refine);
        let (gx, gw) = gauss_legendre(spec.order);
        let mut nodes = Vec::with_capacity(panels.len() * gx.len());
        let mut weights = Vec::with_capacity(panels.len() * gx.len());
        for (a, b) in panels {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Rule1D { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Panels of `[lo, hi]` delimited by the breakpoints that fall inside it,
/// each split into `refine` equal parts. Empty when `hi <= lo`.
pub fn panels(breaks: &[f64], lo: f64, hi: f64, refine: usize) -> Vec<(f64, f64)> {
    if hi <= lo {
        return Vec::new();
    }
    let inside: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
    let grid = merge_breaks(&[lo, hi], &inside);
    let refine = refine.max(1);
    let mut out = Vec::with_capacity((grid.len() - 1) * refine);
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / refine as f64;
        for s in 0..refine {
            let a = w[0] + h * s as f64;
            let b = if s + 1 == refine { w[1] } else { a + h };
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials_exactly() {
        for n in 1..=16 {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {n}: {total}");
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((approx - exact).abs() < 1e-13, "order {n} degree {k}");
            }
        }
    }

    #[test]
    fn panels_respect_breaks() {
        let p = panels(&[-5.0, 0.25, 1.0, 9.0], 0.0, 2.0, 2);
        let ends: Vec<f64> = p.iter().map(|x| x.1).collect();
        assert_eq!(ends, vec![0.125, 0.25, 0.625, 1.0, 1.5, 2.0]);
        assert!(panels(&[], 1.0, 1.0, 1).is_empty());
    }
}
