use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use katlas_cli::config::{Overrides, RunConfig};
use katlas_cli::{commands, CmdResult};

#[derive(Parser)]
#[command(
    name = "katlas",
    about = "Kirchhoff-type equation solver and verification atlas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(short, long)]
    config: PathBuf,

    /// Override the Kirchhoff coefficient a
    #[arg(long)]
    a: Option<f64>,

    /// Override the nonlocal coefficient b
    #[arg(long)]
    b: Option<f64>,

    /// Override the dimension N
    #[arg(long = "N")]
    n: Option<u32>,

    /// Override the number of bound states
    #[arg(long)]
    k_max: Option<usize>,

    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the state cache directory (else KATLAS_CACHE or .katlas-cache)
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, katlas_cli::CmdError> {
        let overrides = Overrides {
            a: self.a,
            b: self.b,
            n: self.n,
            k_max: self.k_max,
            out: self.out.clone(),
            cache: self.cache.clone(),
        };
        RunConfig::load(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural assumptions (f1)-(f4) of the nonlinearity
    CheckF(RunArgs),
    /// Solve radial bound states of the local scalar-field problem
    SolveQ(RunArgs),
    /// Existence/sign thresholds computed from the solved ground state
    Thresholds(RunArgs),
    /// Build the solution atlas (fixed b), or sweep b for diagram data
    Atlas(RunArgs),
    /// Re-run all residual gates from a stored atlas and its state files
    Verify {
        /// Path to atlas.json (or the directory containing it)
        path: PathBuf,
    },
}

fn run() -> CmdResult {
    let cli = Cli::parse();
    match cli.command {
        Command::CheckF(args) => commands::check_f(&args.load()?),
        Command::SolveQ(args) => commands::solve_q(&args.load()?),
        Command::Thresholds(args) => commands::thresholds(&args.load()?),
        Command::Atlas(args) => commands::atlas(&args.load()?),
        Command::Verify { path } => commands::verify(&commands::resolve_atlas_path(&path)),
    }
}

fn main() -> ExitCode {
    let result = run();
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(katlas_cli::exit_code(&result) as u8)
}
