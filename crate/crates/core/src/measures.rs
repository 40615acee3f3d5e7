//! Finite spectral measures on `[-d, d]`.
//!
//! Every measure is a finite list of atoms plus a part that is absolutely
//! continuous with respect to ν, given by a [`DensitySpec`]. Since ν has no
//! atoms the two parts are mutually singular, which makes total variation and
//! Hellinger affinity computable term by term.

use std::fmt;

use crate::dunau::dunau_series;
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::spectrum::TreeModel;

/// Density of the absolutely continuous part, relative to ν.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Constant(f64),
    /// Spectral density of the unit-variance Gauss–Markov process with
    /// `cov(X_o, X_v) = ρ^|v|`.
    GaussMarkov(f64),
    /// `d/(d - x)`, the Gaussian free field.
    GreenFunction,
    /// `Σ cₙ rₙ`.
    DunauSeries(Vec<f64>),
    /// `(Σ cₙ rₙ)²`.
    SquaredDunauSeries(Vec<f64>),
}

impl DensitySpec {
    /// Structural checks that do not need a quadrature rule.
    pub fn validate(&self, degree: usize) -> Result<()> {
        match self {
            DensitySpec::Constant(c) if !(c.is_finite() && *c >= 0.0) => {
                Err(Error::InvalidDensity(format!("constant density must be finite and >= 0, got {c}")))
            }
            DensitySpec::GaussMarkov(rho) => {
                if !rho.is_finite() || rho * rho * (degree as f64 - 1.0) > 1.0 + 1e-12 {
                    return Err(Error::InvalidDensity(format!(
                        "Gauss-Markov density needs |rho| <= 1/sqrt(d-1) = {:.6}, got {rho}",
                        1.0 / (degree as f64 - 1.0).sqrt()
                    )));
                }
                Ok(())
            }
            DensitySpec::GreenFunction => TreeModel::new(degree)?.require_transient("the Green function density"),
            DensitySpec::DunauSeries(c) | DensitySpec::SquaredDunauSeries(c) => {
                if c.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidDensity("series coefficients must be finite".into()))
                }
            }
            DensitySpec::Constant(_) => Ok(()),
        }
    }

    /// Value at `x` for the degree-`d` tree.
    pub fn eval(&self, d: usize, x: f64) -> f64 {
        match self {
            DensitySpec::Constant(c) => *c,
            DensitySpec::GaussMarkov(rho) => gauss_markov_value(d, *rho, x),
            DensitySpec::GreenFunction => d as f64 / (d as f64 - x),
            DensitySpec::DunauSeries(c) => dunau_series(d, c, x),
            DensitySpec::SquaredDunauSeries(c) => dunau_series(d, c, x).powi(2),
        }
    }

    /// Identically zero, decided structurally.
    pub fn is_zero(&self) -> bool {
        match self {
            DensitySpec::Constant(c) => *c == 0.0,
            DensitySpec::DunauSeries(c) | DensitySpec::SquaredDunauSeries(c) => c.iter().all(|&x| x == 0.0),
            _ => false,
        }
    }
}

fn gauss_markov_value(d: usize, rho: f64, x: f64) -> f64 {
    (1.0 - rho * rho) / (1.0 + rho * rho * (d as f64 - 1.0) - rho * x)
}

/// Spectral density (w.r.t. ν) of the Gauss–Markov process with parameter ρ:
/// `(1 - ρ²)/(1 + ρ²(d-1) - ρx)`, the sum of `ρⁿ rₙ(x)`.
pub fn gauss_markov_density(d: usize, rho: f64, x: f64) -> Result<f64> {
    let model = TreeModel::new(d)?;
    if !model.in_support(x) {
        return Err(invalid(format!("x = {x} outside the support of nu")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(invalid(format!("|rho| must be at most 1, got {rho}")));
    }
    Ok(gauss_markov_value(d, rho, x))
}

/// Spectral density of the Gaussian free field, `d/(d - x)`.
pub fn green_density(d: usize, x: f64) -> Result<f64> {
    let model = TreeModel::new(d)?;
    model.require_transient("the Green function")?;
    if !model.in_support(x) {
        return Err(invalid(format!("x = {x} outside the support of nu")));
    }
    Ok(d as f64 / (d as f64 - x))
}

/// Whether the Gauss–Markov process on `T_d` is a factor of i.i.d.:
/// `|ρ| <= 1/√(d-1)`.
pub fn gauss_markov_is_fiid(d: usize, rho: f64) -> Result<bool> {
    if d == 2 {
        return Err(Error::Unsupported(
            "the Gauss-Markov threshold is established for d >= 3 only; at d = 2 the \
             critical density is not integrable against the arcsine law"
                .into(),
        ));
    }
    TreeModel::new(d)?;
    if !(rho.abs() <= 1.0) {
        return Err(invalid(format!("|rho| must be at most 1, got {rho}")));
    }
    Ok(rho.abs() <= 1.0 / ((d - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A finite measure on `[-d, d]`: atoms plus a density against ν.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    degree: usize,
    atoms: Vec<Atom>,
    density: DensitySpec,
    ac_mass: f64,
}

impl SpectralMeasure {
    /// Validates the atoms and density; the density is checked for
    /// nonnegativity and finite mass on the nodes of `rule`.
    pub fn new(atoms: Vec<Atom>, density: DensitySpec, rule: &QuadratureRule) -> Result<Self> {
        let degree = rule.degree();
        check_atoms(degree, &atoms)?;
        density.validate(degree)?;
        let values = rule.eval(|t| density.eval(degree, t))?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::InvalidDensity(format!("density is negative ({v:e}) at node t = {}", rule.nodes()[i])));
        }
        let ac_mass = rule.sum(&values);
        if !ac_mass.is_finite() {
            return Err(Error::InvalidDensity("density has infinite mass".into()));
        }
        Ok(Self { degree, atoms, density, ac_mass })
    }

    /// Purely atomic measure; needs no quadrature.
    pub fn atomic(degree: usize, atoms: Vec<Atom>) -> Result<Self> {
        TreeModel::new(degree)?;
        check_atoms(degree, &atoms)?;
        Ok(Self { degree, atoms, density: DensitySpec::Constant(0.0), ac_mass: 0.0 })
    }

    pub fn dirac(degree: usize, location: f64, mass: f64) -> Result<Self> {
        Self::atomic(degree, vec![Atom { location, mass }])
    }

    /// The spectral measure ν of the tree itself.
    pub fn plancherel(degree: usize) -> Result<Self> {
        TreeModel::new(degree)?;
        Ok(Self { degree, atoms: Vec::new(), density: DensitySpec::Constant(1.0), ac_mass: 1.0 })
    }

    pub fn absolutely_continuous(density: DensitySpec, rule: &QuadratureRule) -> Result<Self> {
        Self::new(Vec::new(), density, rule)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &DensitySpec {
        &self.density
    }

    /// Mass of the absolutely continuous part, computed at construction.
    pub fn ac_mass(&self) -> f64 {
        self.ac_mass
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    fn density_values(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        check_rule(self.degree, rule)?;
        let d = self.degree;
        rule.eval(|t| self.density.eval(d, t))
    }

    /// `∫ f dμ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, rule: &QuadratureRule) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * f(a.location)).fold(0.0, |acc, v| acc + v);
        if self.density.is_zero() {
            return Ok(atoms);
        }
        check_rule(self.degree, rule)?;
        let d = self.degree;
        let ac = crate::quadrature::integrate(rule, |t| f(t) * self.density.eval(d, t))?;
        Ok(atoms + ac)
    }
}

fn check_atoms(degree: usize, atoms: &[Atom]) -> Result<()> {
    let bound = degree as f64;
    for a in atoms {
        if !(a.location.is_finite() && a.location.abs() <= bound) {
            return Err(invalid(format!("atom location {} outside [-{bound}, {bound}]", a.location)));
        }
        if !(a.mass.is_finite() && a.mass > 0.0) {
            return Err(invalid(format!("atom mass must be positive, got {}", a.mass)));
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if atoms[..i].iter().any(|b| b.location == a.location) {
            return Err(invalid(format!("duplicate atom location {}", a.location)));
        }
    }
    Ok(())
}

fn check_rule(degree: usize, rule: &QuadratureRule) -> Result<()> {
    if rule.degree() != degree {
        return Err(Error::DegreeMismatch(degree, rule.degree()));
    }
    Ok(())
}

fn check_pair(a: &SpectralMeasure, b: &SpectralMeasure) -> Result<()> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch(a.degree, b.degree));
    }
    Ok(())
}

/// `μ([-d, d])`.
pub fn total_mass(mu: &SpectralMeasure, rule: &QuadratureRule) -> Result<f64> {
    mu.integrate(|_| 1.0, rule)
}

/// `∫ tᵏ dμ`.
pub fn moment(mu: &SpectralMeasure, k: usize, rule: &QuadratureRule) -> Result<f64> {
    mu.integrate(|t| t.powi(k as i32), rule)
}

/// Total variation distance `½(Σ|m₁ - m₂| + ∫|f₁ - f₂| dν)`.
///
/// Atoms are matched by exact location.
pub fn tv_distance(a: &SpectralMeasure, b: &SpectralMeasure, rule: &QuadratureRule) -> Result<f64> {
    check_pair(a, b)?;
    // Sum over the union of locations in sorted order so that tv(a, b) == tv(b, a) bit for bit.
    let mass_at = |m: &SpectralMeasure, t: f64| m.atoms.iter().find(|x| x.location == t).map_or(0.0, |x| x.mass);
    let mut locations: Vec<f64> = a.atoms.iter().chain(&b.atoms).map(|x| x.location).collect();
    locations.sort_by(f64::total_cmp);
    locations.dedup();
    let atomic = locations.iter().fold(0.0, |acc, &t| acc + (mass_at(a, t) - mass_at(b, t)).abs());
    let ac = if a.density == b.density {
        0.0
    } else {
        let fa = a.density_values(rule)?;
        let fb = b.density_values(rule)?;
        let diff: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).collect();
        rule.sum(&diff)
    };
    Ok(0.5 * (atomic + ac))
}

/// Hellinger affinity `Σ √(m₁m₂) + ∫ √(f₁f₂) dν` over common atoms.
pub fn hellinger_affinity(a: &SpectralMeasure, b: &SpectralMeasure, rule: &QuadratureRule) -> Result<f64> {
    check_pair(a, b)?;
    let atomic: f64 = a
        .atoms
        .iter()
        .filter_map(|x| b.atoms.iter().find(|y| y.location == x.location).map(|y| (x.mass * y.mass).sqrt()))
        .fold(0.0, |acc, v| acc + v);
    if a.density.is_zero() || b.density.is_zero() {
        return Ok(atomic);
    }
    let fa = a.density_values(rule)?;
    let fb = b.density_values(rule)?;
    let prod: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| (x * y).sqrt()).collect();
    Ok(atomic + rule.sum(&prod))
}

/// Which realizability class a spectral measure falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Absolutely continuous w.r.t. ν: realized by a (linear) factor of i.i.d.
    FactorOfIID,
    /// Has atoms, all inside the support of ν: a weak limit of factors of
    /// i.i.d. but not a factor itself.
    WeakLimitOnly,
    /// Has an atom outside the support of ν.
    NotWeakLimit,
}

impl Classification {
    pub fn criterion(&self) -> &'static str {
        match self {
            Classification::FactorOfIID => "absolutely continuous with respect to the spectral measure nu of T_d",
            Classification::WeakLimitOnly => {
                "has atoms, so not absolutely continuous w.r.t. nu; support lies inside supp(nu)"
            }
            Classification::NotWeakLimit => "support not contained in supp(nu) = [-2 sqrt(d-1), 2 sqrt(d-1)]",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::FactorOfIID => "FactorOfIID",
            Classification::WeakLimitOnly => "WeakLimitOnly",
            Classification::NotWeakLimit => "NotWeakLimit",
        };
        f.write_str(s)
    }
}

/// Classifies `μ` by its atoms. Absolute continuity is decided structurally.
pub fn classify(mu: &SpectralMeasure) -> Result<Classification> {
    if mu.atoms.is_empty() && mu.ac_mass <= 0.0 {
        return Err(invalid("the zero measure is degenerate and has no classification"));
    }
    if mu.atoms.is_empty() {
        return Ok(Classification::FactorOfIID);
    }
    let model = TreeModel::new(mu.degree)?;
    if mu.atoms.iter().all(|a| model.in_support(a.location)) {
        Ok(Classification::WeakLimitOnly)
    } else {
        Ok(Classification::NotWeakLimit)
    }
}
