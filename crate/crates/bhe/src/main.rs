use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bhe::commands::{self, DEFAULT_TOLERANCE};
use bhe::config::SurfaceConfig;
use bhe::{CliError, Outcome};

#[derive(Parser)]
#[command(name = "bhe", version, about = "Bismut-Hermitian-Einstein model verification and the reduced toric PDE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity, Bismut-flatness and reduction checks on a catalog model.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the T^2 reduction of a catalog model with its checks.
    Reduce {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve or evaluate the reduced PDE on a product surface.
    Pde {
        #[command(subcommand)]
        action: PdeAction,
    },
    /// Grid-refinement study of a product surface.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PdeAction {
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Residual {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<SurfaceConfig, CliError> {
    SurfaceConfig::parse(&bhe::io::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Verify { model, tol, out } => commands::run_verify(&model, tol, &out),
        Command::Reduce { model, tol, out } => commands::run_reduce(&model, tol, &out),
        Command::Pde { action: PdeAction::Solve { config, out } } => commands::run_pde_solve(&load(&config)?, &out),
        Command::Pde { action: PdeAction::Residual { config, out } } => {
            commands::run_pde_residual(&load(&config)?, &out)
        }
        Command::Converge { config, out } => commands::run_converge(&load(&config)?, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
