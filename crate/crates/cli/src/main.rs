//! `eikonal`: batch front end for symmetry verification, envelope
//! evaluation, residual checks, grid transforms and the fast-marching
//! comparison.
//!
//! Exit codes: 0 success, 1 a check failed (including monotonicity
//! violations in `transform`), 2 unreadable or malformed input.

mod commands;
mod run;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eikonal_core::solutions::Branch;
use eikonal_core::transforms::AxisLattice;

use commands::transform::Kind;
use run::CliError;

#[derive(Parser)]
#[command(name = "eikonal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for sampling and Newton start jitter; overrides the seed in the input file.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override for the command's pass/fail check.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check every operator of a JSON catalog against u_mu u_mu = c.
    VerifyOps {
        #[arg(long)]
        spec: PathBuf,
        /// JSON report path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a general solution on a grid and write one CSV row per root.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        branch: Option<Branch>,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic and finite-difference residuals of a general solution.
    Residual {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        branch: Option<Branch>,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a Legendre or hodograph transform to a grid field file.
    Transform {
        #[arg(value_enum)]
        kind: Kind,
        /// Input grid field.
        #[arg(long, alias = "input")]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Resampled axis as origin,spacing,count.
        #[arg(long, value_parser = commands::transform::parse_lattice)]
        target: Option<AxisLattice>,
        #[command(flatten)]
        common: Common,
    },
    /// Fast marching at several resolutions against an analytic reference.
    FmmCompare {
        /// Optional JSON configuration; defaults to the point-source cone.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::VerifyOps { spec, out, common } => {
            commands::verify_ops::run(&spec, out.as_deref(), common.seed.unwrap_or(0), common.tol)
        }
        Command::Eval {
            spec,
            out,
            branch,
            common,
        } => commands::eval::eval(&spec, &out, common.seed, branch, common.tol),
        Command::Residual {
            spec,
            out,
            branch,
            common,
        } => commands::eval::residual(&spec, out.as_deref(), common.seed, branch, common.tol),
        Command::Transform {
            kind,
            spec,
            out,
            target,
            common,
        } => commands::transform::run(
            kind,
            &spec,
            &out,
            target,
            common.seed.unwrap_or(0),
            common.tol,
        ),
        Command::FmmCompare { spec, out, common } => commands::fmm::run(
            spec.as_deref(),
            out.as_deref(),
            common.seed.unwrap_or(0),
            common.tol,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
