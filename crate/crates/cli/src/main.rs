use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use proxkit_cli::commands::{check, norms, run, Overrides};
use proxkit_cli::CliError;

/// Convex-splitting solver toolkit: proximal gradient iterations over
/// JSON problem files.
#[derive(Parser)]
#[command(name = "proxkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and optionally write a CSV trace.
    Run {
        /// JSON problem file
        file: PathBuf,
        /// Override the iteration cap
        #[arg(long)]
        max_iter: Option<usize>,
        /// Override the relative displacement tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Override the step: a number, or "auto" for 1/beta
        #[arg(long)]
        step: Option<String>,
        /// Write the iteration trace to this CSV file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Verify a problem file against the brute-force checkers.
    Check {
        /// JSON problem file
        file: PathBuf,
        /// Corrupt prox outputs before checking (validates the checker)
        #[arg(long, hide = true)]
        inject_prox_fault: bool,
    },
    /// Print estimated operator norms and the model Lipschitz bound.
    Norms {
        /// JSON problem file
        file: PathBuf,
    },
}

fn parse_step(step: Option<String>) -> Result<Option<Option<f64>>, CliError> {
    match step {
        None => Ok(None),
        Some(s) if s == "auto" => Ok(Some(None)),
        Some(s) => match s.parse::<f64>() {
            Ok(g) => Ok(Some(Some(g))),
            Err(_) => Err(CliError::Parse(format!(
                "--step must be a number or \"auto\", got \"{s}\""
            ))),
        },
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            file,
            max_iter,
            tol,
            step,
            trace,
        } => {
            let overrides = Overrides {
                max_iter,
                tol,
                step: parse_step(step)?,
            };
            run(&file, &overrides, trace.as_deref())
        }
        Command::Check {
            file,
            inject_prox_fault,
        } => check(&file, inject_prox_fault),
        Command::Norms { file } => norms(&file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
