use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::Overrides;

#[derive(Parser)]
#[command(name = "hodgewave", version, about = "Hodge wave equation on simplicial meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (INI)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run even if the boundary condition fails the admissibility test
    #[arg(long = "unsafe", global = true)]
    unsafe_bc: bool,

    /// Write a state snapshot every N steps
    #[arg(long, global = true, value_name = "STRIDE")]
    snapshots: Option<usize>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Manifold report and operator self-tests
    CheckMesh,
    /// Admissibility of the configured boundary condition
    CheckBc,
    /// Time integration with energy accounting
    Simulate,
    /// Refinement sweep against an analytic solution
    Converge,
}

/// Message plus exit code: 1 for invalid input, 2 for runtime failure.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<hodgewave::Error> for CliError {
    fn from(e: hodgewave::Error) -> Self {
        use hodgewave::Error::*;
        match e {
            SingularSaddle { .. } | SolverResidual { .. } | NonFinite { .. } => CliError::runtime(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::invalid("--config <path> is required"))?;
    let cfg = commands::load(&path)?;
    let ov = Overrides {
        unsafe_bc: cli.unsafe_bc,
        snapshots: cli.snapshots,
        out: cli.out,
    };
    match cli.command {
        Command::CheckMesh => commands::check_mesh(&cfg),
        Command::CheckBc => commands::check_bc(&cfg),
        Command::Simulate => commands::simulate(&cfg, &ov),
        Command::Converge => commands::converge_cmd(&cfg, &ov),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
