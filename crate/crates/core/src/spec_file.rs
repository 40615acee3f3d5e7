//! Plain-text (TOML) measure specifications.
//!
//! ```toml
//! degree = 3
//!
//! [[atoms]]
//! location = 2.0
//! mass = 1.0
//!
//! [density]
//! kind = "gauss_markov"   # constant | gauss_markov | green | dunau_series | squared_dunau_series
//! parameters = [0.5]
//! ```
//!
//! `atoms` and `density` are both optional; a missing density means the
//! measure is purely atomic. `constant` and `gauss_markov` take one
//! parameter, `green` none, and the series kinds take their coefficients
//! `c_0, c_1, …`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Atom, DensitySpec, SpectralMeasure};
use crate::quadrature::QuadratureRule;

/// A measure as written in a spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub degree: usize,
    pub atoms: Vec<Atom>,
    pub density: Option<DensitySpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    degree: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<RawAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<RawDensity>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    location: f64,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    kind: String,
    #[serde(default)]
    parameters: Vec<f64>,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn density_from_raw(raw: RawDensity) -> Result<DensitySpec> {
    let n = raw.parameters.len();
    let one = |kind: &str| -> Result<f64> {
        if n == 1 {
            Ok(raw.parameters[0])
        } else {
            Err(parse_err(format!("density.parameters: `{kind}` takes exactly 1 parameter, got {n}")))
        }
    };
    match raw.kind.as_str() {
        "constant" => Ok(DensitySpec::Constant(one("constant")?)),
        "gauss_markov" => Ok(DensitySpec::GaussMarkov(one("gauss_markov")?)),
        "green" if n == 0 => Ok(DensitySpec::GreenFunction),
        "green" => Err(parse_err(format!("density.parameters: `green` takes no parameters, got {n}"))),
        "dunau_series" => Ok(DensitySpec::DunauSeries(raw.parameters)),
        "squared_dunau_series" => Ok(DensitySpec::SquaredDunauSeries(raw.parameters)),
        other => Err(parse_err(format!(
            "density.kind: unknown kind `{other}`; expected constant, gauss_markov, green, dunau_series or squared_dunau_series"
        ))),
    }
}

fn density_to_raw(d: &DensitySpec) -> RawDensity {
    let (kind, parameters) = match d {
        DensitySpec::Constant(c) => ("constant", vec![*c]),
        DensitySpec::GaussMarkov(rho) => ("gauss_markov", vec![*rho]),
        DensitySpec::GreenFunction => ("green", Vec::new()),
        DensitySpec::DunauSeries(c) => ("dunau_series", c.clone()),
        DensitySpec::SquaredDunauSeries(c) => ("squared_dunau_series", c.clone()),
    };
    RawDensity { kind: kind.to_string(), parameters }
}

impl MeasureSpec {
    /// Parses and structurally validates a spec document.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| parse_err(e.to_string().trim_end().to_string()))?;
        let atoms: Vec<Atom> = raw.atoms.into_iter().map(|a| Atom { location: a.location, mass: a.mass }).collect();
        let density = raw.density.map(density_from_raw).transpose()?;
        let spec = Self { degree: raw.degree, atoms, density };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks everything that does not need a quadrature rule.
    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(parse_err(format!("degree: must be at least 2, got {}", self.degree)));
        }
        SpectralMeasure::atomic(self.degree, self.atoms.clone()).map_err(|e| parse_err(format!("atoms: {e}")))?;
        if let Some(d) = &self.density {
            d.validate(self.degree).map_err(|e| parse_err(format!("density: {e}")))?;
        }
        if self.atoms.is_empty() && self.density.as_ref().is_none_or(DensitySpec::is_zero) {
            return Err(parse_err("spec describes the zero measure; give atoms or a nonzero density"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        let raw = RawSpec {
            degree: self.degree,
            atoms: self.atoms.iter().map(|a| RawAtom { location: a.location, mass: a.mass }).collect(),
            density: self.density.as_ref().map(density_to_raw),
        };
        toml::to_string(&raw).expect("spec fields are always representable")
    }

    /// The measure, with the density checked on the nodes of `rule`.
    pub fn to_measure(&self, rule: &QuadratureRule) -> Result<SpectralMeasure> {
        match &self.density {
            None => SpectralMeasure::atomic(self.degree, self.atoms.clone()),
            Some(d) => {
                if rule.degree() != self.degree {
                    return Err(Error::DegreeMismatch(self.degree, rule.degree()));
                }
                SpectralMeasure::new(self.atoms.clone(), d.clone(), rule)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = "degree = 3\n\n[[atoms]]\nlocation = 2.0\nmass = 1.0\n\n[density]\nkind = \"gauss_markov\"\nparameters = [0.5]\n";
        let spec = MeasureSpec::parse(text).unwrap();
        assert_eq!(spec.degree, 3);
        assert_eq!(spec.atoms, vec![Atom { location: 2.0, mass: 1.0 }]);
        assert_eq!(spec.density, Some(DensitySpec::GaussMarkov(0.5)));
        assert_eq!(MeasureSpec::parse(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn green_and_atomic_only() {
        let g = MeasureSpec::parse("degree = 4\n[density]\nkind = \"green\"\n").unwrap();
        assert_eq!(g.density, Some(DensitySpec::GreenFunction));
        let a = MeasureSpec::parse("degree = 3\n[[atoms]]\nlocation = 3.0\nmass = 0.5\n").unwrap();
        assert_eq!(a.density, None);
    }

    #[test]
    fn errors_name_line_or_field() {
        let e = MeasureSpec::parse("degree = 3\n[density]\nkind = \"gauss_markov\"\nparameters = [0.5\n").unwrap_err();
        assert!(e.to_string().contains("line 4"), "{e}");
        let e = MeasureSpec::parse("[density]\nkind = \"green\"\n").unwrap_err();
        assert!(e.to_string().contains("degree"), "{e}");
        let e = MeasureSpec::parse("degree = 3\n[density]\nkind = \"gauss_markov\"\nparameters = []\n").unwrap_err();
        assert!(e.to_string().contains("density.parameters"), "{e}");
        let e = MeasureSpec::parse("degree = 3\n[density]\nkind = \"poisson\"\n").unwrap_err();
        assert!(e.to_string().contains("density.kind"), "{e}");
        let e = MeasureSpec::parse("degree = 3\n[[atoms]]\nlocation = 5.0\nmass = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("atoms"), "{e}");
        let e = MeasureSpec::parse("degree = 3\ncolour = 1\n[density]\nkind = \"green\"\n").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        assert!(MeasureSpec::parse("degree = 3\n").is_err());
        assert!(MeasureSpec::parse("degree = 2\n[density]\nkind = \"green\"\n").is_err());
    }

    fn arb_density() -> impl Strategy<Value = DensitySpec> {
        let coeff = prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL;
        prop_oneof![
            (0.0..1e6f64).prop_map(DensitySpec::Constant),
            (-0.7..0.7f64).prop_map(DensitySpec::GaussMarkov),
            Just(DensitySpec::GreenFunction),
            prop::collection::vec(coeff, 1..8).prop_map(DensitySpec::DunauSeries),
            prop::collection::vec(coeff, 1..8).prop_map(DensitySpec::SquaredDunauSeries),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            degree in 3usize..9,
            atoms in prop::collection::vec((-3.0..3.0f64, 1e-9..10.0f64), 0..4),
            density in prop::option::of(arb_density()),
        ) {
            let mut atoms: Vec<Atom> = atoms.into_iter().map(|(location, mass)| Atom { location, mass }).collect();
            atoms.dedup_by(|a, b| a.location == b.location);
            let spec = MeasureSpec { degree, atoms, density };
            prop_assume!(spec.validate().is_ok());
            let text = spec.to_toml();
            let back = MeasureSpec::parse(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
