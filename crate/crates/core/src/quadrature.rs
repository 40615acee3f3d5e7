//! Quadrature against the Kesten–McKay measure ν.
//!
//! With `t = 2√(d-1)·cos θ` the measure becomes
//!
//! ```text
//! dν = (d/2π) · R² sin²θ / ((d-2)² + R² sin²θ) dθ,   R = 2√(d-1), θ ∈ [0, π]
//! ```
//!
//! which is smooth in θ. Densities with a pole at an endpoint of the support
//! (Gauss–Markov at the critical correlation) pick up the `sin²θ` factor and
//! stay bounded, so a Gauss–Legendre rule in θ converges spectrally for them
//! too.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::spectrum::TreeModel;

/// Default number of nodes.
pub const DEFAULT_NODES: usize = 4096;

/// Nodes and weights for integrating against ν.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    model: TreeModel,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn model(&self) -> TreeModel {
        self.model
    }

    pub fn degree(&self) -> usize {
        self.model.degree()
    }

    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
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

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Applies `f` at every node; fails on the first non-finite value.
    pub fn eval<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .map(|&t| {
                let v = f(t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { node: t, value: v })
                }
            })
            .collect()
    }

    /// `Σ wᵢ·vᵢ` for values already evaluated at the nodes.
    ///
    /// Mirror nodes `±t` are added before weighting, so odd integrands sum to
    /// exactly zero.
    pub fn sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        let n = values.len();
        let mut total = 0.0;
        for i in 0..n / 2 {
            total += self.weights[i] * (values[i] + values[n - 1 - i]);
        }
        if n % 2 == 1 {
            total += self.weights[n / 2] * values[n / 2];
        }
        total
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on the three-term Legendre recurrence, started from the
/// Tricomi asymptotic approximation of the roots.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Builds an `n_nodes`-point rule for ν on `T_d`.
///
/// The rule is symmetric: `nodes[i] = -nodes[n-1-i]` and the weights agree,
/// so odd moments cancel pairwise.
pub fn build_quadrature(model: TreeModel, n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 2 {
        return Err(invalid(format!("quadrature needs at least 2 nodes, got {n_nodes}")));
    }
    let d = model.degree() as f64;
    let radius = model.spectral_radius();
    let r2 = radius * radius;
    let gap = (d - 2.0) * (d - 2.0);
    let (x, w) = gauss_legendre(n_nodes);
    let mut nodes = vec![0.0; n_nodes];
    let mut weights = vec![0.0; n_nodes];
    for i in 0..n_nodes {
        // θ runs from π down to 0 so that t ascends
        let theta = 0.5 * PI * (1.0 - x[i]);
        let s2 = theta.sin().powi(2);
        let jac = 0.5 * PI * w[i];
        weights[i] = jac * d / (2.0 * PI) * r2 * s2 / (gap + r2 * s2);
        nodes[i] = radius * theta.cos();
    }
    // enforce exact symmetry
    for i in 0..n_nodes / 2 {
        let j = n_nodes - 1 - i;
        let t = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -t;
        nodes[j] = t;
        let wm = 0.5 * (weights[i] + weights[j]);
        weights[i] = wm;
        weights[j] = wm;
    }
    if n_nodes % 2 == 1 {
        nodes[n_nodes / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule { model, nodes, weights })
}

/// `Σ wᵢ·f(tᵢ)`; errors on the first node where `f` is not finite.
pub fn integrate<F: FnMut(f64) -> f64>(rule: &QuadratureRule, f: F) -> Result<f64> {
    let values = rule.eval(f)?;
    Ok(rule.sum(&values))
}
