//! Subcommand implementations. Every parameter is validated before any
//! quadrature or sampling starts.

use std::fmt;
use std::path::Path;

use treefiid::dbar::{coupling_product_bound, dbar_lower_bound};
use treefiid::measures::{total_mass, tv_distance, Classification, SpectralMeasure};
use treefiid::quadrature::{build_quadrature, integrate, QuadratureRule};
use treefiid::simulate::{
    empirical_covariances, BranchingMarkovSampler, FieldSampler, FullLinearFactorSampler, GaussMarkovSampler,
    IidSampler, LinearFactorSampler, MarkovSpec, LUMPED_CORE_BUDGET, PASS_SIGMAS,
};
use treefiid::spectrum::{closed_walk_count, kesten_mckay_density, TreeModel};
use treefiid::transforms::{coefficient_table, covariances_from_measure, parse_coefficient_table};
use treefiid::tree::TruncatedTree;

use crate::measure_arg::parse_measure;
use crate::report::{Cell, Report};
use crate::{Common, Format, Process};

/// Relative tolerance for quadrature moments against walk counts.
const MOMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Refused(String),
    Library(treefiid::Error),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Refused(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Refused(m) | CliError::Io(m) => f.write_str(m),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<treefiid::Error> for CliError {
    fn from(e: treefiid::Error) -> Self {
        CliError::Library(e)
    }
}

pub struct Outcome {
    pub pass: bool,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

type CmdResult = Result<Outcome, CliError>;

/// Analytic covariances `c(0..=n)` for the chosen process.
type Analytic = Box<dyn Fn(usize) -> Result<Vec<f64>, CliError>>;

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(common: &Common, report: &Report) -> CmdResult {
    emit(common, &report.render(common.format))?;
    Ok(Outcome { pass: report.all_pass() })
}

fn model(degree: Option<usize>) -> Result<TreeModel, CliError> {
    TreeModel::new(degree.unwrap_or(3)).map_err(|e| CliError::Usage(format!("--d: {e}")))
}

fn rule(model: TreeModel, nodes: usize) -> Result<QuadratureRule, CliError> {
    build_quadrature(model, nodes).map_err(|e| CliError::Usage(format!("--nodes: {e}")))
}

pub fn spectrum(common: &Common, moments: usize, density_points: Option<usize>) -> CmdResult {
    let model = model(common.degree)?;
    let d = model.degree();
    if let Some(points) = density_points {
        if points < 2 {
            return Err(CliError::Usage("--points must be at least 2".into()));
        }
        let r = model.spectral_radius();
        let mut report = Report::new("spectrum density", &["t", "h"]);
        report.set("d", d);
        report.set("spectral_radius", r);
        for i in 0..points {
            let t = -r + 2.0 * r * i as f64 / (points - 1) as f64;
            report.row(vec![t.into(), kesten_mckay_density(model, t).into()]);
        }
        return finish(common, &report);
    }
    // check every order before integrating
    for k in 0..=moments {
        closed_walk_count(model, k)?;
    }
    let rule = rule(model, common.nodes)?;
    let mut report = Report::new("spectrum moments", &["k", "quadrature", "walk_count", "abs_err", "pass"]);
    report.set("d", d);
    report.set("nodes", rule.len());
    report.set("relative_tolerance", MOMENT_TOLERANCE);
    for k in 0..=moments {
        let q = integrate(&rule, |t| t.powi(k as i32))?;
        let w = closed_walk_count(model, k)?;
        let exact = w as f64;
        let err = (q - exact).abs();
        let pass = err <= MOMENT_TOLERANCE * exact.max(1.0);
        report.row(vec![k.into(), q.into(), w.into(), err.into(), pass.into()]);
    }
    finish(common, &report)
}

fn refusal(c: Classification) -> CliError {
    CliError::Refused(format!(
        "classification: {c}: measure is not absolutely continuous w.r.t. nu, so it has no factor-of-i.i.d. realization ({})",
        c.criterion()
    ))
}

pub fn synthesize(common: &Common, measure: &str) -> CmdResult {
    let spec = parse_measure(measure, common.degree)?;
    let model = model(Some(spec.degree))?;
    let rule = rule(model, common.nodes)?;
    let mu = spec.to_measure(&rule)?;
    let class = treefiid::measures::classify(&mu)?;
    if class != Classification::FactorOfIID {
        return Err(refusal(class));
    }
    let s = treefiid::transforms::synthesize(mu.density(), common.radius, &rule)?;
    let text = match common.format {
        Format::Table => coefficient_table(&s.coefficients, s.truncation_error),
        Format::Doc => {
            let mut report = Report::new("synthesize", &["n", "a_n", "sphere_size"]);
            report.set("d", spec.degree);
            report.set("R", common.radius);
            report.set("truncation_error", s.truncation_error);
            report.set("target_mass", s.target_mass);
            for (n, a) in s.coefficients.values.iter().enumerate() {
                let size: Cell = match treefiid::dunau::sphere_size(spec.degree, n) {
                    Ok(v) => Cell::Int(v as u128),
                    Err(_) => treefiid::dunau::sphere_size_f64(spec.degree, n).into(),
                };
                report.row(vec![n.into(), (*a).into(), size]);
            }
            report.render(Format::Doc)
        }
    };
    emit(common, &text)?;
    Ok(Outcome { pass: true })
}

pub fn simulate(
    common: &Common,
    process: Process,
    rho: Option<f64>,
    coeffs: Option<&Path>,
    max_n: Option<usize>,
) -> CmdResult {
    if common.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let need_rho = || -> Result<f64, CliError> {
        let r = rho.ok_or_else(|| CliError::Usage("--rho is required for this process".into()))?;
        if !(r.abs() <= 1.0) {
            return Err(CliError::Usage(format!("--rho must satisfy |rho| <= 1, got {r}")));
        }
        Ok(r)
    };
    let depth = common.depth;
    let mut report = Report::new("simulate", &["n", "estimate", "std_error", "analytic", "tolerance", "pass"]);
    let (sampler, analytic): (Box<dyn FieldSampler>, Analytic) = match process {
        Process::Iid => {
            let tree = TruncatedTree::new(model(common.degree)?.degree(), depth)?;
            report.set("process", "iid");
            (
                Box::new(IidSampler::new(tree)),
                Box::new(|m| Ok((0..=m).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect())),
            )
        }
        Process::GaussMarkov | Process::Ising => {
            let r = need_rho()?;
            let tree = TruncatedTree::new(model(common.degree)?.degree(), depth)?;
            let sampler: Box<dyn FieldSampler> = if process == Process::Ising {
                report.set("process", "ising");
                Box::new(BranchingMarkovSampler::new(tree, MarkovSpec::ising(r)?))
            } else {
                report.set("process", "gauss-markov");
                Box::new(GaussMarkovSampler::new(tree, r)?)
            };
            report.set("rho", r);
            (sampler, Box::new(move |m| Ok((0..=m).map(|n| r.powi(n as i32)).collect())))
        }
        Process::LinearFactor => {
            let path = coeffs.ok_or_else(|| CliError::Usage("--coeffs is required for linear-factor".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let (c, _) =
                parse_coefficient_table(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            if let Some(d) = common.degree {
                if d != c.degree {
                    return Err(CliError::Usage(format!(
                        "--d {d} does not match the coefficient file's degree {}",
                        c.degree
                    )));
                }
            }
            if c.radius() > depth {
                return Err(CliError::Usage(format!("coefficient radius {} exceeds --depth {depth}", c.radius())));
            }
            report.set("process", "linear-factor");
            report.set("R", c.radius());
            let core = TruncatedTree::new(c.degree, depth - c.radius())?;
            let sampler: Box<dyn FieldSampler> = if core.len() <= LUMPED_CORE_BUDGET {
                Box::new(LinearFactorSampler::new(depth, c.clone())?)
            } else {
                Box::new(FullLinearFactorSampler::new(TruncatedTree::new(c.degree, depth)?, c.clone())?)
            };
            let model = model(Some(c.degree))?;
            let nodes = common.nodes;
            (
                sampler,
                Box::new(move |m| {
                    let rule = rule(model, nodes)?;
                    let mu = SpectralMeasure::absolutely_continuous(c.spectral_density(), &rule)?;
                    Ok(covariances_from_measure(&mu, m, &rule)?.values().to_vec())
                }),
            )
        }
    };
    let valid = sampler.valid_radius();
    let max_n = max_n.unwrap_or(valid.min(5));
    if max_n > valid {
        return Err(CliError::Usage(format!("--max-n {max_n} exceeds the valid radius {valid}")));
    }
    let exact = analytic(max_n)?;
    report.set("d", sampler.tree().degree());
    report.set("depth", depth);
    report.set("samples", common.samples);
    report.set("seed", common.seed as u128);
    report.set("tolerance", format!("{PASS_SIGMAS}*std_error"));
    let est = empirical_covariances(sampler.as_ref(), max_n, common.samples, common.seed)?;
    for (n, e) in est.iter().enumerate() {
        let pass = e.agrees_with(exact[n], 0.0);
        report.row(vec![
            n.into(),
            e.estimate.into(),
            e.std_error.into(),
            exact[n].into(),
            (PASS_SIGMAS * e.std_error).into(),
            pass.into(),
        ]);
    }
    finish(common, &report)
}

pub fn dbar(common: &Common, x: &str, y: &str) -> CmdResult {
    let sx = parse_measure(x, common.degree)?;
    let sy = parse_measure(y, common.degree.or(Some(sx.degree)))?;
    if sx.degree != sy.degree {
        return Err(treefiid::Error::DegreeMismatch(sx.degree, sy.degree).into());
    }
    let rule = rule(model(Some(sx.degree))?, common.nodes)?;
    let mx = sx.to_measure(&rule)?;
    let my = sy.to_measure(&rule)?;
    let var_x = total_mass(&mx, &rule)?;
    let var_y = total_mass(&my, &rule)?;
    let tv = tv_distance(&mx, &my, &rule)?;
    let affinity = coupling_product_bound(&mx, &my, &rule)?;
    let bound = dbar_lower_bound(var_x, var_y, tv)?;
    let mut report = Report::new("dbar", &[]);
    report.set("d", sx.degree);
    report.set("var_x", var_x);
    report.set("var_y", var_y);
    report.set("tv_distance", tv);
    report.set("hellinger_affinity", affinity);
    report.set("dbar_lower_bound", bound);
    report.set("orthogonal_in_every_coupling", affinity == 0.0);
    finish(common, &report)
}

pub fn classify(common: &Common, measure: &str) -> CmdResult {
    let spec = parse_measure(measure, common.degree)?;
    let model = model(Some(spec.degree))?;
    // atomic measures need no quadrature
    let mu = match &spec.density {
        None => spec.to_measure(&build_quadrature(model, 2)?)?,
        Some(_) => spec.to_measure(&rule(model, common.nodes)?)?,
    };
    let class = treefiid::measures::classify(&mu)?;
    let mut report = Report::new("classify", &[]);
    report.set("d", spec.degree);
    report.set("spectral_radius", model.spectral_radius());
    report.set("atoms", spec.atoms.len());
    report.set("classification", class.to_string());
    report.set("criterion", class.criterion());
    finish(common, &report)
}
