#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `steklov`: spectra, Riesz means, bound checks and second-term fits for
//! sloshing and Steklov–Dirichlet problems.

mod parse;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steklov_core::Error;

#[derive(Parser)]
#[command(name = "steklov", version, about = "Sloshing and Steklov–Dirichlet spectra, Riesz means and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct SourceArgs {
    /// Built-in domain: rectangle:ℓ,h | triangle:L,α | trapezoid:L,h,α | cylinder:ℓ,h | cylinder:a,b,h | cone:α,h
    #[arg(long)]
    pub preset: Option<String>,
    /// Domain description JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub domain: Option<String>,
    /// Triangle mesh file (solved with P1 elements as given).
    #[arg(long, conflicts_with_all = ["preset", "domain"])]
    pub mesh: Option<String>,
    /// Spectrum CSV to use instead of computing one. A --preset/--domain
    /// given alongside only supplies the geometry.
    #[arg(long, conflicts_with = "mesh")]
    pub spectrum: Option<String>,
    /// sn (sloshing) or sd (Steklov–Dirichlet).
    #[arg(long)]
    pub problem: Option<String>,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Target mesh size; forces FEM even where a closed form is known.
    #[arg(long)]
    pub fem_h: Option<String>,
    /// Mesh grading: element size grows like fem_h + grading·depth.
    #[arg(long, default_value = "0")]
    pub grading: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AtermArg {
    ClosedForm,
    Quadrature,
}

#[derive(Subcommand)]
enum Command {
    /// Write a spectrum CSV.
    Spectrum {
        #[command(flatten)]
        source: SourceArgs,
        /// Report Richardson-extrapolated FEM eigenvalues.
        #[arg(long)]
        extrapolate: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Write a Riesz-mean curve CSV.
    Riesz {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "1")]
        gamma: String,
        /// start:stop:step, logN(start,stop) or a comma-separated list.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Check a bound along a z, k or t grid and write a JSON report.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// main, split, triangle, john2d, johnNd, via-neumann, kroger, bracket,
        /// sd-upper, sd-john2d, sd-lower2d, sd-sum, heat-trace
        #[arg(long)]
        bound: String,
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long)]
        grid: String,
        /// Relative tolerance on top of propagated FEM errors.
        #[arg(long, default_value = "1e-9")]
        tol: String,
        /// Comparison width δ_v for via-neumann.
        #[arg(long)]
        width: Option<String>,
        /// Overrides for the corner-angle bound.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        bc_length: Option<String>,
        /// How the wall integral is evaluated.
        #[arg(long, value_enum, default_value = "closed-form")]
        aterm: AtermArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Fit the second asymptotic coefficient and write a JSON report.
    Asym {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "1")]
        gamma: String,
        /// start:stop
        #[arg(long)]
        window: String,
        /// Fit Richardson-extrapolated FEM eigenvalues.
        #[arg(long)]
        extrapolate: bool,
        #[arg(long)]
        out: Option<String>,
    },
}

/// 0 holds, 1 violated, 2 input error, 3 validity ceiling, 4 hypothesis.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::AboveCeiling { .. } | Error::IndexOutOfRange { .. } => 3,
        Error::Hypothesis(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = run::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    let result = match cli.command {
        Command::Spectrum { source, extrapolate, out } => run::spectrum(&source, extrapolate, out.as_deref()),
        Command::Riesz { source, gamma, grid, out } => run::riesz(&source, &gamma, &grid, out.as_deref()),
        Command::Verify { source, bound, gamma, grid, tol, width, alpha, beta, delta, bc_length, aterm, out } => {
            let o = run::VerifyOptions { bound, gamma, grid, tol, width, alpha, beta, delta, bc_length, aterm };
            run::verify(&source, &o, out.as_deref())
        }
        Command::Asym { source, gamma, window, extrapolate, out } => {
            run::asym(&source, &gamma, &window, extrapolate, out.as_deref())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
