//! `treefiid`: spectral measures, factor-of-i.i.d. synthesis and simulation on
//! the d-regular tree.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a request
//! is refused, 2 on usage or parse errors.

mod commands;
mod measure_arg;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "treefiid", version, about = "Factor of i.i.d. processes on regular trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Tree degree d (at least 2).
    #[arg(long = "d")]
    pub degree: Option<usize>,
    /// Base seed for Monte Carlo runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of Monte Carlo samples.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Depth of the truncated tree.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Truncation radius for synthesis.
    #[arg(long, default_value_t = treefiid::transforms::DEFAULT_RADIUS)]
    pub radius: usize,
    /// Quadrature nodes.
    #[arg(long, default_value_t = treefiid::quadrature::DEFAULT_NODES)]
    pub nodes: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Whitespace-separated columns with `#` headers.
    Table,
    /// A JSON document.
    Doc,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Iid,
    GaussMarkov,
    Ising,
    LinearFactor,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kesten-McKay density and quadrature moments against closed-walk counts.
    Spectrum {
        /// Largest moment order in the table.
        #[arg(long, default_value_t = 10)]
        moments: usize,
        /// Print density samples instead of moments.
        #[arg(long)]
        density: bool,
        /// Number of density samples.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Radial coefficients of a linear factor of i.i.d. with a given spectral
    /// density.
    Synthesize {
        /// Measure: a TOML spec file or an inline spec such as `gauss_markov:0.5`.
        measure: String,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo covariances against their analytic values.
    Simulate {
        #[arg(long, value_enum)]
        process: Process,
        /// Correlation parameter for gauss-markov and ising.
        #[arg(long)]
        rho: Option<f64>,
        /// Coefficient table (as written by `synthesize`) for linear-factor.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Largest distance reported; defaults to min(valid radius, 5).
        #[arg(long)]
        max_n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// d̄₂ lower bound and Hellinger coupling bound for two measures.
    Dbar {
        /// First measure (file or inline spec).
        x: String,
        /// Second measure (file or inline spec).
        y: String,
        #[command(flatten)]
        common: Common,
    },
    /// Factor of i.i.d. / weak limit classification of a measure.
    Classify {
        /// Measure (file or inline spec).
        measure: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Spectrum { moments, density, points, common } => {
            commands::spectrum(&common, moments, density.then_some(points))
        }
        Command::Synthesize { measure, common } => commands::synthesize(&common, &measure),
        Command::Simulate { process, rho, coeffs, max_n, common } => {
            commands::simulate(&common, process, rho, coeffs.as_deref(), max_n)
        }
        Command::Dbar { x, y, common } => commands::dbar(&common, &x, &y),
        Command::Classify { measure, common } => commands::classify(&common, &measure),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
