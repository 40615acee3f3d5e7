//! The dictionary between radial covariance structures and spectral measures,
//! and the synthesis of linear factor-of-i.i.d. coefficients from a target
//! spectral density.
//!
//! Because `r_n(A)δ_o = 𝟙_{S_n}`, a radial function `Σ aₙ 𝟙_{S_n}` is the
//! vector `p(A)δ_o` for `p = Σ aₙ rₙ`. The map `p(A)δ_o ↦ p` is an isometry
//! from radial ℓ²(T_d) onto L²(ν), so the Dunau coefficients of a function in
//! L²(ν) are exactly the radial values of its preimage.

use crate::dunau::{dunau_values, sphere_size_f64};
use crate::error::{invalid, Error, Result};
use crate::measures::{DensitySpec, SpectralMeasure};
use crate::quadrature::QuadratureRule;
use crate::spectrum::{walk_distance_profile, TreeModel};

/// Magnitude below which a negative density value is treated as rounding.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Default truncation radius for synthesis.
pub const DEFAULT_RADIUS: usize = 40;

/// A radial function `v ↦ a_{|v|}` on `T_d`, truncated at radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoefficients {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl RadialCoefficients {
    pub fn new(degree: usize, values: Vec<f64>) -> Result<Self> {
        TreeModel::new(degree)?;
        if values.is_empty() {
            return Err(invalid("radial coefficients need at least a_0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("radial coefficients must be finite"));
        }
        Ok(Self { degree, values })
    }

    /// The identity factor `X = Z`.
    pub fn identity(degree: usize) -> Self {
        Self { degree, values: vec![1.0] }
    }

    pub fn radius(&self) -> usize {
        self.values.len() - 1
    }

    /// `a_0² + Σ aₙ²·|S_n|`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().enumerate().map(|(n, a)| a * a * sphere_size_f64(self.degree, n)).sum()
    }

    /// The polynomial `p = Σ aₙ rₙ` with `p(A)δ_o` equal to this radial
    /// function, as a density.
    pub fn polynomial(&self) -> DensitySpec {
        DensitySpec::DunauSeries(self.values.clone())
    }

    /// Spectral density `p²` of the linear factor of i.i.d. with these
    /// coefficients.
    pub fn spectral_density(&self) -> DensitySpec {
        DensitySpec::SquaredDunauSeries(self.values.clone())
    }
}

/// Radial covariance structure `cₙ = cov(X_o, X_v)`, `|v| = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence {
    degree: usize,
    values: Vec<f64>,
}

impl CovarianceSequence {
    pub fn new(degree: usize, values: Vec<f64>) -> Result<Self> {
        TreeModel::new(degree)?;
        let Some(&c0) = values.first() else {
            return Err(invalid("covariance sequence needs at least c_0"));
        };
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(invalid(format!("c_0 must be a finite variance, got {c0}")));
        }
        if let Some((n, c)) = values.iter().enumerate().find(|(_, c)| !(c.abs() <= c0 * (1.0 + 1e-12))) {
            return Err(invalid(format!("|c_{n}| = {} exceeds c_0 = {c0}", c.abs())));
        }
        Ok(Self { degree, values })
    }

    /// `cₙ = ρⁿ`.
    pub fn geometric(degree: usize, rho: f64, radius: usize) -> Result<Self> {
        Self::new(degree, (0..=radius).map(|n| rho.powi(n as i32)).collect())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius(&self) -> usize {
        self.values.len() - 1
    }
}

/// `c(n) = ∫ rₙ dμ / |S_n|`.
pub fn covariance_from_measure(mu: &SpectralMeasure, n: usize, rule: &QuadratureRule) -> Result<f64> {
    let d = mu.degree();
    let raw = mu.integrate(|t| dunau_values(d, n, t)[n], rule)?;
    Ok(raw / sphere_size_f64(d, n))
}

/// `c(0) … c(radius)` in one pass over the nodes.
pub fn covariances_from_measure(
    mu: &SpectralMeasure,
    radius: usize,
    rule: &QuadratureRule,
) -> Result<CovarianceSequence> {
    let d = mu.degree();
    let mut out = vec![0.0; radius + 1];
    for a in mu.atoms() {
        for (o, r) in out.iter_mut().zip(dunau_values(d, radius, a.location)) {
            *o += a.mass * r;
        }
    }
    if !mu.density().is_zero() {
        if rule.degree() != d {
            return Err(Error::DegreeMismatch(d, rule.degree()));
        }
        for (t, w) in rule.iter() {
            let f = mu.density().eval(d, t);
            if !f.is_finite() {
                return Err(Error::NonFinite { node: t, value: f });
            }
            for (o, r) in out.iter_mut().zip(dunau_values(d, radius, t)) {
                *o += w * f * r;
            }
        }
    }
    for (n, o) in out.iter_mut().enumerate() {
        *o /= sphere_size_f64(d, n);
    }
    Ok(CovarianceSequence { degree: d, values: out })
}

/// `⟨A^k δ_o, c⟩ = Σₙ W_k(n)·cₙ`, where `W_k(n)` counts length-`k` walks
/// from the root ending on `S_n`.
pub fn moments_from_covariance(c: &CovarianceSequence, k: usize) -> Result<f64> {
    if k > c.radius() {
        return Err(invalid(format!(
            "moment k = {k} needs covariances up to radius {k}, only {} available",
            c.radius()
        )));
    }
    let profile = walk_distance_profile(TreeModel::new(c.degree)?, k)?;
    Ok(profile.iter().zip(&c.values).map(|(&w, &cn)| w as f64 * cn).sum())
}

/// Orthogonal projection of `f` onto `span{r_0 … r_N}`:
/// `cₙ = ∫ f·rₙ dν / |S_n|`.
pub fn dunau_expand<F: FnMut(f64) -> f64>(f: F, n_max: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let values = rule.eval(f)?;
    expand_values(&values, n_max, rule)
}

fn expand_values(values: &[f64], n_max: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let d = rule.degree();
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let norm = rule.sum(&sq);
    if !norm.is_finite() {
        return Err(Error::InvalidDensity("function is not square-integrable against nu".into()));
    }
    let mut out = vec![0.0; n_max + 1];
    for ((t, w), f) in rule.iter().zip(values) {
        for (o, r) in out.iter_mut().zip(dunau_values(d, n_max, t)) {
            *o += w * f * r;
        }
    }
    for (n, o) in out.iter_mut().enumerate() {
        *o /= sphere_size_f64(d, n);
    }
    Ok(out)
}

fn density_at_nodes(g: &DensitySpec, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let d = rule.degree();
    g.validate(d)?;
    let raw = rule.eval(|t| g.eval(d, t))?;
    raw.into_iter()
        .zip(rule.nodes())
        .map(|(v, &t)| {
            if v >= 0.0 {
                Ok(v)
            } else if v >= -NEGATIVE_CLAMP {
                Ok(0.0)
            } else {
                Err(Error::InvalidDensity(format!("density is negative ({v:e}) at node t = {t}")))
            }
        })
        .collect()
}

/// Result of [`synthesize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub coefficients: RadialCoefficients,
    /// `∫ g dν - ‖a‖²`, clamped at zero.
    pub truncation_error: f64,
    /// `∫ g dν`.
    pub target_mass: f64,
}

/// Radial coefficients of a linear factor of i.i.d. whose spectral density
/// approximates `g`: the Dunau coefficients of `√g` up to radius `radius`.
pub fn synthesize(g: &DensitySpec, radius: usize, rule: &QuadratureRule) -> Result<Synthesis> {
    let values = density_at_nodes(g, rule)?;
    let target_mass = rule.sum(&values);
    if !target_mass.is_finite() {
        return Err(Error::InvalidDensity("density has infinite mass".into()));
    }
    let roots: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    let coeffs = expand_values(&roots, radius, rule)?;
    let coefficients = RadialCoefficients { degree: rule.degree(), values: coeffs };
    let truncation_error = (target_mass - coefficients.l2_norm_sq()).max(0.0);
    Ok(Synthesis { coefficients, truncation_error, target_mass })
}

pub fn synthesize_coefficients(g: &DensitySpec, radius: usize, rule: &QuadratureRule) -> Result<RadialCoefficients> {
    Ok(synthesize(g, radius, rule)?.coefficients)
}

/// Parseval residual `∫ g dν - Σ cₙ²|S_n|` of the radius-`R` synthesis.
pub fn truncation_error(g: &DensitySpec, radius: usize, rule: &QuadratureRule) -> Result<f64> {
    Ok(synthesize(g, radius, rule)?.truncation_error)
}

/// Density with the given covariance values as Dunau coefficients, and its
/// `ℓ²` budget `Σ cₙ²|S_n|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceDensity {
    pub density: DensitySpec,
    pub l2_norm_sq: f64,
}

pub fn density_from_covariance(c: &CovarianceSequence) -> CovarianceDensity {
    let l2_norm_sq = c.values.iter().enumerate().map(|(n, v)| v * v * sphere_size_f64(c.degree, n)).sum();
    CovarianceDensity { density: DensitySpec::DunauSeries(c.values.clone()), l2_norm_sq }
}

/// Plain-text export: a `#` header with `d`, `R` and `truncation_error`,
/// then one `n a_n sphere_size` row per radius. Values are written in
/// shortest round-trip form, so [`parse_coefficient_table`] recovers them
/// exactly.
pub fn coefficient_table(coeffs: &RadialCoefficients, truncation_error: f64) -> String {
    let mut out = format!(
        "# radial coefficients\n# d = {}\n# R = {}\n# truncation_error = {truncation_error:e}\n# n a_n sphere_size\n",
        coeffs.degree,
        coeffs.radius()
    );
    for (n, a) in coeffs.values.iter().enumerate() {
        let size = crate::dunau::sphere_size(coeffs.degree, n)
            .map(|s| s.to_string())
            .unwrap_or_else(|_| format!("{:e}", sphere_size_f64(coeffs.degree, n)));
        out.push_str(&format!("{n} {a:e} {size}\n"));
    }
    out
}

/// Reads a table written by [`coefficient_table`]; returns the coefficients
/// and the recorded truncation error.
pub fn parse_coefficient_table(text: &str) -> Result<(RadialCoefficients, f64)> {
    let mut degree = None;
    let mut radius = None;
    let mut error = None;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some((key, value)) = h.split_once('=') {
                let value = value.trim();
                let bad = || Error::Parse(format!("line {lineno}: bad value `{value}` for {}", key.trim()));
                match key.trim() {
                    "d" => degree = Some(value.parse::<usize>().map_err(|_| bad())?),
                    "R" => radius = Some(value.parse::<usize>().map_err(|_| bad())?),
                    "truncation_error" => error = Some(value.parse::<f64>().map_err(|_| bad())?),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("line {lineno}: expected `n a_n sphere_size`")));
        }
        let n: usize = cols[0].parse().map_err(|_| Error::Parse(format!("line {lineno}: bad n `{}`", cols[0])))?;
        if n != values.len() {
            return Err(Error::Parse(format!("line {lineno}: expected n = {}, got {n}", values.len())));
        }
        let a: f64 = cols[1].parse().map_err(|_| Error::Parse(format!("line {lineno}: bad a_n `{}`", cols[1])))?;
        values.push(a);
    }
    let degree = degree.ok_or_else(|| Error::Parse("missing `# d = ...` header".into()))?;
    if let Some(r) = radius {
        if r + 1 != values.len() {
            return Err(Error::Parse(format!("header says R = {r} but {} rows follow", values.len())));
        }
    }
    let coeffs = RadialCoefficients::new(degree, values).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((coeffs, error.unwrap_or(0.0)))
}
