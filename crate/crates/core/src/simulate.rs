//! Monte Carlo realizations of invariant processes on truncated trees, and
//! empirical covariance and isometry estimates.
//!
//! All randomness comes from [`SampleNoise`], keyed on `(seed, sample index,
//! vertex)`. Estimators fan samples out over a rayon pool, collect per-sample
//! statistics in index order and reduce sequentially, so results are
//! bit-identical for any thread count.

use rayon::prelude::*;

use crate::dunau::sphere_size_f64;
use crate::error::{invalid, Result};
use crate::measures::SpectralMeasure;
use crate::quadrature::{integrate, QuadratureRule};
use crate::rng::SampleNoise;
use crate::transforms::RadialCoefficients;
use crate::tree::{FieldSample, TruncatedTree};

/// Monte Carlo checks pass within this many standard errors.
pub const PASS_SIGMAS: f64 = 4.0;

/// Generates independent realizations of one process.
pub trait FieldSampler: Sync {
    /// Tree on which samples are reported.
    fn tree(&self) -> &TruncatedTree;

    /// Radius up to which reported values are exact.
    fn valid_radius(&self) -> usize;

    /// Realization number `index` for `seed`.
    fn sample(&self, seed: u64, index: u64) -> FieldSample;
}

fn iid_field(tree: &TruncatedTree, seed: u64, index: u64) -> FieldSample {
    let mut values = vec![0.0; tree.len()];
    SampleNoise::new(seed, index).fill_normals(0, &mut values);
    FieldSample::new(values, tree.depth())
}

/// Independent standard normals on every vertex.
pub fn sample_iid_gaussian(tree: &TruncatedTree, seed: u64) -> FieldSample {
    iid_field(tree, seed, 0)
}

/// `X_v = Σ_{dist(u,v) ≤ R} a_{dist(u,v)} Z_u` on every vertex whose
/// `R`-ball lies inside the tree.
pub fn apply_linear_factor(tree: &TruncatedTree, coeffs: &RadialCoefficients, z: &FieldSample) -> Result<FieldSample> {
    let radius = coeffs.radius();
    if coeffs.degree != tree.degree() {
        return Err(invalid(format!(
            "coefficients are for degree {}, tree has degree {}",
            coeffs.degree,
            tree.degree()
        )));
    }
    if z.values.len() != tree.len() || z.valid_radius < tree.depth() {
        return Err(invalid("input field must be valid on the whole tree"));
    }
    if radius > tree.depth() {
        return Err(invalid(format!("coefficient radius {radius} exceeds tree depth {}", tree.depth())));
    }
    let valid = tree.depth() - radius;
    let mut values = vec![0.0; tree.len()];
    for v in tree.ball_range(valid) {
        values[v] = tree.ball(v, radius).into_iter().map(|(u, dist)| coeffs.values[dist] * z.values[u]).sum();
    }
    Ok(FieldSample::new(values, valid))
}

/// `X_root ~ N(0,1)`, `X_child = ρ X_parent + √(1-ρ²) ε`.
pub fn sample_gauss_markov(tree: &TruncatedTree, rho: f64, seed: u64) -> Result<FieldSample> {
    Ok(GaussMarkovSampler::new(tree.clone(), rho)?.sample(seed, 0))
}

/// A reversible chain with uniform stationary law and a real observable.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSpec {
    transition: Vec<Vec<f64>>,
    observable: Vec<f64>,
}

impl MarkovSpec {
    pub fn new(transition: Vec<Vec<f64>>, observable: Vec<f64>) -> Result<Self> {
        let s = transition.len();
        if s == 0 || observable.len() != s {
            return Err(invalid("transition matrix and observable must have matching nonzero size"));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != s {
                return Err(invalid(format!("row {i} has length {}, expected {s}", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(invalid(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("row {i} sums to {sum}, not 1")));
            }
        }
        // detailed balance for the uniform law is symmetry of M
        for i in 0..s {
            for j in 0..i {
                if (transition[i][j] - transition[j][i]).abs() > 1e-12 {
                    return Err(invalid(format!("chain is not reversible w.r.t. the uniform law at ({i}, {j})")));
                }
            }
        }
        Ok(Self { transition, observable })
    }

    /// Two-state chain on `{-1, 1}` keeping its state with probability
    /// `(1+ρ)/2`.
    pub fn ising(rho: f64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return Err(invalid(format!("Ising parameter must satisfy |rho| <= 1, got {rho}")));
        }
        let stay = 0.5 * (1.0 + rho);
        let flip = 0.5 * (1.0 - rho);
        Self::new(vec![vec![stay, flip], vec![flip, stay]], vec![-1.0, 1.0])
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn observable(&self) -> &[f64] {
        &self.observable
    }

    fn step(&self, from: usize, u: f64) -> usize {
        let row = &self.transition[from];
        let mut acc = 0.0;
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        // rounding in the row sum
        row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
    }
}

/// Branching Markov chain: uniform root state, children drawn from `M` given
/// their parent. Records `φ(state)`.
pub fn sample_branching_markov(tree: &TruncatedTree, spec: &MarkovSpec, seed: u64) -> FieldSample {
    BranchingMarkovSampler::new(tree.clone(), spec.clone()).sample(seed, 0)
}

/// I.i.d. standard normal field.
#[derive(Debug, Clone)]
pub struct IidSampler {
    tree: TruncatedTree,
}

impl IidSampler {
    pub fn new(tree: TruncatedTree) -> Self {
        Self { tree }
    }
}

impl FieldSampler for IidSampler {
    fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    fn valid_radius(&self) -> usize {
        self.tree.depth()
    }

    fn sample(&self, seed: u64, index: u64) -> FieldSample {
        iid_field(&self.tree, seed, index)
    }
}

#[derive(Debug, Clone)]
pub struct GaussMarkovSampler {
    tree: TruncatedTree,
    rho: f64,
}

impl GaussMarkovSampler {
    pub fn new(tree: TruncatedTree, rho: f64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return Err(invalid(format!("Gauss-Markov parameter must satisfy |rho| <= 1, got {rho}")));
        }
        Ok(Self { tree, rho })
    }
}

impl FieldSampler for GaussMarkovSampler {
    fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    fn valid_radius(&self) -> usize {
        self.tree.depth()
    }

    fn sample(&self, seed: u64, index: u64) -> FieldSample {
        let mut values = iid_field(&self.tree, seed, index).values;
        let innovation = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        // parents precede children in the level layout
        for v in 1..values.len() {
            let p = self.tree.parent(v).unwrap();
            values[v] = self.rho * values[p] + innovation * values[v];
        }
        FieldSample::new(values, self.tree.depth())
    }
}

#[derive(Debug, Clone)]
pub struct BranchingMarkovSampler {
    tree: TruncatedTree,
    spec: MarkovSpec,
}

impl BranchingMarkovSampler {
    pub fn new(tree: TruncatedTree, spec: MarkovSpec) -> Self {
        Self { tree, spec }
    }
}

impl FieldSampler for BranchingMarkovSampler {
    fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    fn valid_radius(&self) -> usize {
        self.tree.depth()
    }

    fn sample(&self, seed: u64, index: u64) -> FieldSample {
        let mut u = vec![0.0; self.tree.len()];
        SampleNoise::new(seed, index).fill_uniforms(0, &mut u);
        let s = self.spec.states();
        let mut states = vec![0usize; u.len()];
        states[0] = ((u[0] * s as f64) as usize).min(s - 1);
        for v in 1..u.len() {
            let p = self.tree.parent(v).unwrap();
            states[v] = self.spec.step(states[p], u[v]);
        }
        let values = states.iter().map(|&st| self.spec.observable[st]).collect();
        FieldSample::new(values, self.tree.depth())
    }
}

/// Full-field linear factor: draws Z on every vertex of a depth-`D` tree and
/// applies [`apply_linear_factor`].
#[derive(Debug, Clone)]
pub struct FullLinearFactorSampler {
    tree: TruncatedTree,
    coeffs: RadialCoefficients,
}

impl FullLinearFactorSampler {
    pub fn new(tree: TruncatedTree, coeffs: RadialCoefficients) -> Result<Self> {
        if coeffs.radius() > tree.depth() {
            return Err(invalid(format!("coefficient radius {} exceeds tree depth {}", coeffs.radius(), tree.depth())));
        }
        if coeffs.degree != tree.degree() {
            return Err(invalid("coefficient degree does not match the tree"));
        }
        Ok(Self { tree, coeffs })
    }
}

impl FieldSampler for FullLinearFactorSampler {
    fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    fn valid_radius(&self) -> usize {
        self.tree.depth() - self.coeffs.radius()
    }

    fn sample(&self, seed: u64, index: u64) -> FieldSample {
        let z = iid_field(&self.tree, seed, index);
        apply_linear_factor(&self.tree, &self.coeffs, &z).expect("validated at construction")
    }
}

/// Largest core (valid region) [`LinearFactorSampler`] accepts.
pub const LUMPED_CORE_BUDGET: usize = 4096;

/// Linear factor of i.i.d. on a depth-`D` tree, reported on the core ball of
/// radius `D - R`.
///
/// Outside the core, `X` only sees `Z` through sums over the level sets of the
/// subtrees hanging off the core boundary: a vertex `u` at depth `j` below
/// boundary vertex `w` is at distance `dist(w, v) + j` from every core vertex
/// `v`. Those sums are independent centred normals with variance equal to the
/// level size, so they are drawn directly. The law of the core field is the
/// same as when every vertex of the depth-`D` tree is drawn.
#[derive(Debug, Clone)]
pub struct LinearFactorSampler {
    core: TruncatedTree,
    depth: usize,
    coeffs: RadialCoefficients,
    /// `(boundary vertex, depth below it, level size)` per lumped slot.
    lumps: Vec<(usize, usize, f64)>,
    /// Row `v`: weight of every noise slot in `X_v`.
    weights: Vec<Vec<f64>>,
}

impl LinearFactorSampler {
    pub fn new(depth: usize, coeffs: RadialCoefficients) -> Result<Self> {
        let radius = coeffs.radius();
        if radius > depth {
            return Err(invalid(format!("coefficient radius {radius} exceeds tree depth {depth}")));
        }
        TruncatedTree::new(coeffs.degree, depth)?;
        let core_radius = depth - radius;
        let core = TruncatedTree::new(coeffs.degree, core_radius)?;
        if core.len() > LUMPED_CORE_BUDGET {
            return Err(invalid(format!(
                "valid core has {} vertices, more than {LUMPED_CORE_BUDGET}; use a larger radius or smaller depth",
                core.len()
            )));
        }
        let d = coeffs.degree;
        let mut lumps = Vec::new();
        for w in core.level_range(core_radius) {
            for j in 1..=radius {
                let size = if core_radius == 0 { sphere_size_f64(d, j) } else { (d as f64 - 1.0).powi(j as i32) };
                lumps.push((w, j, size));
            }
        }
        let slots = core.len() + lumps.len();
        let a = |k: usize| coeffs.values.get(k).copied().unwrap_or(0.0);
        let weights = (0..core.len())
            .map(|v| {
                let mut row = vec![0.0; slots];
                for u in 0..core.len() {
                    row[u] = a(core.distance(u, v));
                }
                for (i, &(w, j, _)) in lumps.iter().enumerate() {
                    row[core.len() + i] = a(core.distance(w, v) + j);
                }
                row
            })
            .collect();
        Ok(Self { core, depth, coeffs, lumps, weights })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coefficients(&self) -> &RadialCoefficients {
        &self.coeffs
    }

    /// Number of noise slots: core vertices followed by lumped level sums.
    pub fn slots(&self) -> usize {
        self.core.len() + self.lumps.len()
    }

    /// Lumped slot `i`: the boundary vertex, the depth below it, and the number
    /// of i.i.d. values summed.
    pub fn lump(&self, i: usize) -> (usize, usize, f64) {
        self.lumps[i]
    }

    /// Evaluates the core field from explicit noise: core values of `Z`, then
    /// each level sum.
    pub fn evaluate(&self, noise: &[f64]) -> FieldSample {
        assert_eq!(noise.len(), self.slots());
        let values = self.weights.iter().map(|row| row.iter().zip(noise).map(|(w, z)| w * z).sum()).collect();
        FieldSample::new(values, self.core.depth())
    }
}

impl FieldSampler for LinearFactorSampler {
    fn tree(&self) -> &TruncatedTree {
        &self.core
    }

    fn valid_radius(&self) -> usize {
        self.core.depth()
    }

    fn sample(&self, seed: u64, index: u64) -> FieldSample {
        let mut noise = vec![0.0; self.slots()];
        SampleNoise::new(seed, index).fill_normals(0, &mut noise);
        let n = self.core.len();
        for (z, &(_, _, size)) in noise[n..].iter_mut().zip(&self.lumps) {
            *z *= size.sqrt();
        }
        self.evaluate(&noise)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { estimate: mean, std_error: (var / n).sqrt() }
    }

    /// `|estimate - target| <= 4·SE + slack`.
    pub fn agrees_with(&self, target: f64, slack: f64) -> bool {
        (self.estimate - target).abs() <= PASS_SIGMAS * self.std_error + slack
    }
}

/// Per-sample statistics for samples `0..n_samples`, in index order.
fn per_sample<S, F, T>(sampler: &S, n_samples: usize, seed: u64, stat: F) -> Vec<T>
where
    S: FieldSampler + ?Sized,
    F: Fn(&FieldSample) -> T + Sync,
    T: Send,
{
    (0..n_samples as u64).into_par_iter().map(|i| stat(&sampler.sample(seed, i))).collect()
}

/// `E[X_o X_v]` for `|v| = n`: each sample contributes the average of
/// `X_o X_v` over the sphere `S_n`.
pub fn empirical_covariance<S: FieldSampler + ?Sized>(
    sampler: &S,
    n: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    Ok(empirical_covariances(sampler, n, n_samples, seed)?[n])
}

/// [`empirical_covariance`] for every `n <= max_n` from the same samples.
pub fn empirical_covariances<S: FieldSampler + ?Sized>(
    sampler: &S,
    max_n: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if max_n > sampler.valid_radius() {
        return Err(invalid(format!("distance {max_n} exceeds the sampler's valid radius {}", sampler.valid_radius())));
    }
    if n_samples < 2 {
        return Err(invalid("need at least 2 samples for a standard error"));
    }
    let tree = sampler.tree();
    let stats = per_sample(sampler, n_samples, seed, |f| {
        let root = f.values[0];
        (0..=max_n)
            .map(|n| {
                let range = tree.level_range(n);
                let len = range.len() as f64;
                root * f.values[range].iter().sum::<f64>() / len
            })
            .collect::<Vec<f64>>()
    });
    Ok((0..=max_n)
        .map(|n| {
            let col: Vec<f64> = stats.iter().map(|s| s[n]).collect();
            Estimate::from_samples(&col)
        })
        .collect())
}

/// `[p(A)X]_o` for `p = Σ aₙ rₙ`: since `r_n(A)` is self-adjoint and
/// `r_n(A)δ_o = 𝟙_{S_n}`, this is `Σ aₙ Σ_{|v|=n} X_v`.
pub fn polynomial_at_root(tree: &TruncatedTree, p: &RadialCoefficients, field: &FieldSample) -> f64 {
    p.values.iter().enumerate().map(|(n, a)| a * field.values[tree.level_range(n)].iter().sum::<f64>()).sum()
}

/// Outcome of [`empirical_isometry_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryCheck {
    /// Monte Carlo `E[(p(A)X)_o²]`.
    pub lhs: Estimate,
    /// `∫ p² dμ`.
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `E[(p(A)X)_o²]` with `∫ p² dμ_X`.
pub fn empirical_isometry_check<S: FieldSampler + ?Sized>(
    p: &RadialCoefficients,
    sampler: &S,
    mu: &SpectralMeasure,
    n_samples: usize,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<IsometryCheck> {
    if p.radius() > sampler.valid_radius() {
        return Err(invalid(format!(
            "polynomial degree {} exceeds the sampler's valid radius {}",
            p.radius(),
            sampler.valid_radius()
        )));
    }
    if p.degree != mu.degree() {
        return Err(invalid("polynomial and measure have different degrees"));
    }
    let tree = sampler.tree();
    let xs = per_sample(sampler, n_samples, seed, |f| polynomial_at_root(tree, p, f).powi(2));
    let lhs = Estimate::from_samples(&xs);
    let poly = p.polynomial();
    let d = p.degree;
    let rhs = mu.integrate(|t| poly.eval(d, t).powi(2), rule)?;
    Ok(IsometryCheck { lhs, rhs, pass: lhs.agrees_with(rhs, 0.0) })
}

/// `∫ p² dν` for the polynomial of `p`; the variance of the linear factor
/// with coefficients `p`.
pub fn linear_factor_variance(p: &RadialCoefficients, rule: &QuadratureRule) -> Result<f64> {
    let poly = p.polynomial();
    let d = p.degree;
    integrate(rule, |t| poly.eval(d, t).powi(2))
}
