//! Measure arguments: either a path to a TOML spec file or an inline
//! shorthand such as `gauss_markov:0.5`, `atom:2.0:0.5+constant:1` or `green`.
//!
//! Inline terms, joined with `+`:
//!
//! ```text
//! atom:LOC[:MASS]              point mass (MASS defaults to 1)
//! constant:C
//! gauss_markov:RHO
//! green
//! dunau_series:C0,C1,...
//! squared_dunau_series:C0,C1,...
//! ```

use std::path::Path;

use treefiid::measures::{Atom, DensitySpec};
use treefiid::spec_file::MeasureSpec;
use treefiid::{Error, Result};

fn number(field: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{field}: `{s}` is not a number")))
}

fn numbers(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| number(field, x)).collect()
}

fn parse_inline(text: &str, degree: usize) -> Result<MeasureSpec> {
    let mut atoms = Vec::new();
    let mut density: Option<DensitySpec> = None;
    for term in text.split('+') {
        let term = term.trim();
        let (kind, rest) = term.split_once(':').unwrap_or((term, ""));
        let d = match kind {
            "atom" => {
                let mut parts = rest.split(':');
                let location = number("atom location", parts.next().unwrap_or(""))?;
                let mass = match parts.next() {
                    Some(m) => number("atom mass", m)?,
                    None => 1.0,
                };
                if parts.next().is_some() {
                    return Err(Error::Parse(format!("`{term}`: expected atom:LOC[:MASS]")));
                }
                atoms.push(Atom { location, mass });
                continue;
            }
            "constant" => DensitySpec::Constant(number("constant", rest)?),
            "gauss_markov" => DensitySpec::GaussMarkov(number("gauss_markov", rest)?),
            "green" if rest.is_empty() => DensitySpec::GreenFunction,
            "green" => return Err(Error::Parse("green takes no parameters".into())),
            "dunau_series" => DensitySpec::DunauSeries(numbers("dunau_series", rest)?),
            "squared_dunau_series" => DensitySpec::SquaredDunauSeries(numbers("squared_dunau_series", rest)?),
            other => return Err(Error::Parse(format!("unknown measure term `{other}`"))),
        };
        if density.replace(d).is_some() {
            return Err(Error::Parse(format!("`{text}`: at most one density term is allowed")));
        }
    }
    let spec = MeasureSpec { degree, atoms, density };
    spec.validate()?;
    Ok(spec)
}

/// Resolves a measure argument. A spec file's `degree` must agree with `degree`
/// when one was given on the command line.
pub fn parse_measure(arg: &str, degree: Option<usize>) -> Result<MeasureSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let spec = MeasureSpec::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if let Some(d) = degree {
            if d != spec.degree {
                return Err(Error::DegreeMismatch(d, spec.degree));
            }
        }
        return Ok(spec);
    }
    parse_inline(arg, degree.unwrap_or(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_terms() {
        let s = parse_measure("gauss_markov:0.5", None).unwrap();
        assert_eq!(s.density, Some(DensitySpec::GaussMarkov(0.5)));
        assert_eq!(s.degree, 3);
        let s = parse_measure("atom:2.0:0.5+constant:1", Some(4)).unwrap();
        assert_eq!(s.atoms, vec![Atom { location: 2.0, mass: 0.5 }]);
        assert_eq!(s.degree, 4);
        let s = parse_measure("dunau_series:1,0.5", None).unwrap();
        assert_eq!(s.density, Some(DensitySpec::DunauSeries(vec![1.0, 0.5])));
        assert!(parse_measure("green", Some(2)).is_err());
        assert!(parse_measure("constant:1+green", None).is_err());
        assert!(parse_measure("atom:x", None).is_err());
        assert!(parse_measure("bogus", None).is_err());
    }
}
