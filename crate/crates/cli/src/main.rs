use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use domcoup_cli::{
    cmd_bounds, cmd_oracle, cmd_solve, cmd_verify, CliError, SolveOptions, ValueMode,
};

#[derive(Parser)]
#[command(
    name = "domcoup",
    version,
    about = "Builds and audits order-respecting couplings between dominated probability sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scheduled sweep and emit the coupling with its certificates
    Solve {
        /// Number of sweep steps
        #[arg(long)]
        steps: usize,
        /// Append the per-step trace to the output
        #[arg(long)]
        trace: bool,
        /// Render rationals as floats instead of exact "p/q" strings
        #[arg(long)]
        float: bool,
        /// Also solve by maximum flow and report feasibility
        #[arg(long)]
        oracle_check: bool,
        /// Instance JSON file
        file: PathBuf,
    },
    /// Audit a claimed coupling file against an instance
    Verify {
        /// Coupling JSON file: a list of [n, m, "p/q"] triples
        coupling: PathBuf,
        /// Instance JSON file
        instance: PathBuf,
    },
    /// Emit the pointwise accuracy certificate for one entry
    Bounds {
        /// Entry to certify, as two indices with the first strictly below
        #[arg(long, num_args = 2, value_names = ["N", "M"])]
        pair: Vec<usize>,
        /// Accuracy target as an exact rational "p/q"
        #[arg(long)]
        eps: String,
        /// Instance JSON file
        file: PathBuf,
    },
    /// Solve directly by maximum flow and report feasibility
    Oracle {
        /// Instance JSON file
        file: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|err| CliError::Validation(format!("{}: {err}", path.display())))
}

fn dispatch(cli: Cli) -> Result<(Value, u8), CliError> {
    match cli.command {
        Command::Solve { steps, trace, float, oracle_check, file } => {
            let options = SolveOptions {
                steps,
                trace,
                mode: if float { ValueMode::Float } else { ValueMode::Exact },
                oracle_check,
            };
            Ok((cmd_solve(&read(&file)?, &options)?, 0))
        }
        Command::Verify { coupling, instance } => {
            let (doc, ok) = cmd_verify(&read(&coupling)?, &read(&instance)?)?;
            Ok((doc, if ok { 0 } else { 1 }))
        }
        Command::Bounds { pair, eps, file } => {
            let [n, m] = pair[..] else {
                return Err(CliError::Validation("--pair takes exactly two indices".into()));
            };
            Ok((cmd_bounds(&read(&file)?, n, m, &eps)?, 0))
        }
        Command::Oracle { file } => {
            let (doc, feasible) = cmd_oracle(&read(&file)?)?;
            Ok((doc, if feasible { 0 } else { 1 }))
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok((doc, code)) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("documents serialize"));
            ExitCode::from(code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
