//! Gauss–Legendre rules and a panel-adaptive integrator built on them.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on (−1, 1).
///
/// Nodes are returned in ascending order and are exactly symmetric about 0.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::argument(format!(
            "Gauss–Legendre order must be at least 2, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess for the i-th largest root.
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
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
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
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A fixed Gauss–Legendre panel rule that can be mapped to any interval.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Result<Self> {
        let (nodes, weights) = gauss_legendre(order)?;
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        sum * half
    }
}

/// Value of an adaptive integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Panel-adaptive integration.
///
/// The interval is first cut at `breakpoints` (any that fall inside it), then
/// each panel is bisected until the rule and the rule applied to both halves
/// agree to within the panel's share of `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rule: &PanelRule,
    tol: f64,
    max_evaluations: usize,
) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let length = b - a;
    let per_panel = rule.order();
    let mut evaluations = 0usize;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut stack: Vec<(f64, f64, f64)> = cuts
        .windows(2)
        .rev()
        .map(|w| {
            let whole = rule.integrate(w[0], w[1], &f);
            (w[0], w[1], whole)
        })
        .collect();
    evaluations += stack.len() * per_panel;

    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        evaluations += 2 * per_panel;
        let refined = left + right;
        let diff = (refined - whole).abs();
        let budget = tol * (hi - lo) / length;
        if diff <= budget || mid <= lo || mid >= hi {
            value += refined;
            error += diff;
            continue;
        }
        if evaluations > max_evaluations {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}] exceeded {max_evaluations} evaluations"
            )));
        }
        stack.push((mid, hi, right));
        stack.push((lo, mid, left));
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate: error,
        evaluations: evaluations.max(1),
    })
}
