//! `compvar`: residual checks, Noether conservation reports and invariant
//! densities for problem files.
//!
//! Exit status: 0 when every check passes, 1 on a tolerance failure, 2 on a
//! schema or parse error, 3 on an evaluation error.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use compvar::pwmap::MapError;
use compvar::varcalc::ProblemError;

use commands::{DensityArgs, Form, GeneratorSource, Outcome, Which};
use problem::DensityModeName;
use report::Format;

#[derive(Parser)]
#[command(
    name = "compvar",
    version,
    about = "Variational problems with self-composition z = q(q(x))"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a residual over uniformly spaced interior samples.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "el")]
        which: Which,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        /// Invariance residual variant, for `--which invariance`.
        #[arg(long, value_enum, default_value = "direct")]
        form: Form,
    },
    /// Check that the Noether quantity is piecewise constant.
    Noether {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "solve_ode")]
        tau: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "tau")]
        xi: Option<String>,
        /// Solve the symmetry equation for τ, with ξ = 0 and τ(b) = 1.
        #[arg(long)]
        solve_ode: bool,
        /// Also write the machine-format report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Invariant density of the file's map by Frobenius-Perron iteration.
    Density {
        file: PathBuf,
        /// Number of iterates.
        #[arg(long)]
        n: Option<usize>,
        /// Number of grid cells.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<DensityModeName>,
        /// Two-column `node value` table.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Run the built-in worked example in both composition modes.
    VerifyPaperExample {
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
}

/// Errors that end a command before a verdict.
#[derive(Debug)]
pub enum Failure {
    Schema(anyhow::Error),
    Eval(anyhow::Error),
}

pub fn eval(e: impl std::fmt::Display) -> Failure {
    Failure::Eval(anyhow::anyhow!("{e}"))
}

/// Evaluation failures inside map validation are reported as such; every
/// other map error means the file describes an invalid problem.
pub fn map_failure(e: MapError) -> Failure {
    match e {
        MapError::Eval(_) => eval(e),
        e => Failure::Schema(anyhow::anyhow!("map: {e}")),
    }
}

pub fn problem_failure(e: ProblemError) -> Failure {
    match e {
        ProblemError::Composition(MapError::Eval(_)) | ProblemError::Map(MapError::Eval(_)) => eval(e),
        e => Failure::Schema(anyhow::anyhow!("{e}")),
    }
}

fn run(cli: Cli) -> Result<(Outcome, Format, Option<PathBuf>), Failure> {
    Ok(match cli.command {
        Command::Check {
            file,
            which,
            samples,
            format,
            form,
        } => (
            commands::check(&problem::load(&file)?, which, samples, form)?,
            format,
            None,
        ),
        Command::Noether {
            file,
            tau,
            xi,
            solve_ode,
            report,
            format,
        } => {
            let file = problem::load(&file)?;
            let source = match (&tau, solve_ode) {
                (Some(tau), _) => GeneratorSource::Explicit {
                    tau,
                    xi: xi.as_deref().unwrap_or("0"),
                },
                (None, true) => GeneratorSource::SolveOde,
                (None, false) => GeneratorSource::File,
            };
            (commands::noether(&file, source)?, format, report)
        }
        Command::Density {
            file,
            n,
            grid,
            mode,
            out,
            format,
        } => {
            let args = DensityArgs {
                iterations: n,
                grid,
                mode: mode.map(Into::into),
                out: out.as_deref(),
            };
            (commands::density(&problem::load(&file)?, args)?, format, None)
        }
        Command::VerifyPaperExample { format } => (commands::verify_paper_example(), format, None),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((outcome, format, report)) => {
            print!("{}", outcome.report.render(format));
            if let Some(path) = report {
                if let Err(e) = std::fs::write(&path, outcome.report.render(Format::Machine)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            }
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(Failure::Schema(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Eval(e)) => {
            eprintln!("evaluation error: {e:#}");
            ExitCode::from(3)
        }
    }
}
