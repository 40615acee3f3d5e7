//! Bounds on the d̄₂ distance between invariant processes.
//!
//! `d̄₂(X, Y)` is an infimum over all invariant couplings and is not computed.
//! What is available: a lower bound from the spectral measures alone, the
//! Hellinger bound on `|E X_o Y_o|`, and Monte Carlo upper-bound witnesses
//! `E[(X_o - Y_o)²]` for concrete couplings.

use rayon::prelude::*;

use crate::dunau::sphere_size_f64;
use crate::error::{invalid, Result};
use crate::measures::{hellinger_affinity, DensitySpec, SpectralMeasure};
use crate::quadrature::QuadratureRule;
use crate::rng::SampleNoise;
use crate::simulate::Estimate;
use crate::transforms::RadialCoefficients;

/// Slack for the Δ₁ inequality.
pub const DELTA1_TOLERANCE: f64 = 1e-10;

/// Lower bound on `d̄₂(X, Y)` from the variances and the total variation
/// distance of the spectral measures: `√(s - √(s² - 4·dtv²))`, `s = var_x + var_y`.
pub fn dbar_lower_bound(var_x: f64, var_y: f64, dtv: f64) -> Result<f64> {
    for (name, v) in [("var_x", var_x), ("var_y", var_y), ("dtv", dtv)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    let s = var_x + var_y;
    // tolerate rounding in a TV distance computed by quadrature
    let slack = 1e-12 * s.max(1.0);
    if 2.0 * dtv > s + slack {
        return Err(invalid(format!("2·dtv = {} exceeds var_x + var_y = {s}", 2.0 * dtv)));
    }
    let dtv = dtv.min(0.5 * s);
    let q = 4.0 * dtv * dtv;
    if q == 0.0 {
        return Ok(0.0);
    }
    // s - √(s² - q) = q / (s + √(s² - q)), without cancellation
    let disc = ((s - 2.0 * dtv) * (s + 2.0 * dtv)).max(0.0).sqrt();
    Ok((q / (s + disc)).sqrt())
}

/// Both sides of `∫(√f - √g)² dν >= s - √(s² - Δ₁²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates the Δ₁ inequality for two densities against ν.
pub fn delta1_check(f: &DensitySpec, g: &DensitySpec, rule: &QuadratureRule) -> Result<Delta1Check> {
    let d = rule.degree();
    f.validate(d)?;
    g.validate(d)?;
    let mut lhs = 0.0;
    let mut s = 0.0;
    let mut delta = 0.0;
    for (x, w) in rule.iter() {
        let (fx, gx) = (f.eval(d, x), g.eval(d, x));
        if !(fx.is_finite() && gx.is_finite()) {
            return Err(crate::Error::NonFinite { node: x, value: if fx.is_finite() { gx } else { fx } });
        }
        if fx < -crate::transforms::NEGATIVE_CLAMP || gx < -crate::transforms::NEGATIVE_CLAMP {
            return Err(crate::Error::InvalidDensity(format!("negative density value at t = {x}")));
        }
        let (fx, gx) = (fx.max(0.0), gx.max(0.0));
        lhs += w * (fx.sqrt() - gx.sqrt()).powi(2);
        s += w * (fx + gx);
        delta += w * (fx - gx).abs();
    }
    let disc = ((s - delta) * (s + delta)).max(0.0).sqrt();
    let rhs = if delta == 0.0 { 0.0 } else { delta * delta / (s + disc) };
    Ok(Delta1Check { lhs, rhs, pass: lhs >= rhs - DELTA1_TOLERANCE })
}

/// Upper bound on `|E(X_o Y_o)|` over all invariant couplings: the Hellinger
/// affinity of the spectral measures.
pub fn coupling_product_bound(mu_x: &SpectralMeasure, mu_y: &SpectralMeasure, rule: &QuadratureRule) -> Result<f64> {
    hellinger_affinity(mu_x, mu_y, rule)
}

/// A coupling of two invariant processes, observed at the root.
pub trait CoupledSampler: Sync {
    /// `(X_o, Y_o)` for realization `index`.
    fn sample_pair(&self, seed: u64, index: u64) -> (f64, f64);
}

/// Root values of a linear factor depend on `Z` only through the sphere sums
/// `Σ_{|u|=n} Z_u`, which are independent `N(0, |S_n|)`.
fn sphere_sums(degree: usize, radius: usize, noise: &mut SampleNoise, first: u64) -> Vec<f64> {
    let mut s = vec![0.0; radius + 1];
    noise.fill_normals(first, &mut s);
    for (n, v) in s.iter_mut().enumerate() {
        *v *= sphere_size_f64(degree, n).sqrt();
    }
    s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two linear factors of the same i.i.d. field.
#[derive(Debug, Clone)]
pub struct SharedFieldCoupling {
    x: RadialCoefficients,
    y: RadialCoefficients,
}

impl SharedFieldCoupling {
    pub fn new(x: RadialCoefficients, y: RadialCoefficients) -> Result<Self> {
        if x.degree != y.degree {
            return Err(crate::Error::DegreeMismatch(x.degree, y.degree));
        }
        Ok(Self { x, y })
    }

    /// `∫ (Σ (aₙ - a'ₙ) rₙ)² dν = Σ (aₙ - a'ₙ)² |S_n|`, the exact witness value.
    pub fn expected_witness(&self) -> f64 {
        let r = self.x.radius().max(self.y.radius());
        (0..=r)
            .map(|n| {
                let a = self.x.values.get(n).copied().unwrap_or(0.0);
                let b = self.y.values.get(n).copied().unwrap_or(0.0);
                (a - b).powi(2) * sphere_size_f64(self.x.degree, n)
            })
            .sum()
    }
}

impl CoupledSampler for SharedFieldCoupling {
    fn sample_pair(&self, seed: u64, index: u64) -> (f64, f64) {
        let r = self.x.radius().max(self.y.radius());
        let s = sphere_sums(self.x.degree, r, &mut SampleNoise::new(seed, index), 0);
        (dot(&self.x.values, &s), dot(&self.y.values, &s))
    }
}

/// Two linear factors of independent i.i.d. fields.
#[derive(Debug, Clone)]
pub struct IndependentCoupling {
    x: RadialCoefficients,
    y: RadialCoefficients,
}

impl IndependentCoupling {
    pub fn new(x: RadialCoefficients, y: RadialCoefficients) -> Result<Self> {
        if x.degree != y.degree {
            return Err(crate::Error::DegreeMismatch(x.degree, y.degree));
        }
        Ok(Self { x, y })
    }
}

impl CoupledSampler for IndependentCoupling {
    fn sample_pair(&self, seed: u64, index: u64) -> (f64, f64) {
        let mut noise = SampleNoise::new(seed, index);
        let rx = self.x.radius();
        let sx = sphere_sums(self.x.degree, rx, &mut noise, 0);
        let sy = sphere_sums(self.y.degree, self.y.radius(), &mut noise, rx as u64 + 1);
        (dot(&self.x.values, &sx), dot(&self.y.values, &sy))
    }
}

/// Monte Carlo `E[(X_o - Y_o)²]` for one coupling: an upper bound witness
/// for `d̄₂²`.
pub fn empirical_dbar_witness<C: CoupledSampler + ?Sized>(
    sampler: &C,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if n_samples < 2 {
        return Err(invalid("need at least 2 samples for a standard error"));
    }
    let xs: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let (x, y) = sampler.sample_pair(seed, i);
            (x - y).powi(2)
        })
        .collect();
    Ok(Estimate::from_samples(&xs))
}
