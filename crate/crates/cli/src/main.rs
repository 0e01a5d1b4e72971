//! `eigeniter` command-line front end.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eigeniter",
    version,
    about = "Principal Laplace eigenpairs by inverse iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a mesh file.
    Mesh(MeshArgs),
    /// Run an inverse iteration and write trace, solution and manifest.
    Solve(SolveArgs),
    /// Smallest discrete eigenpair by dense factorization.
    Oracle(OracleArgs),
    /// Reference eigenvalue from a one-dimensional reduction.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Disk,
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Robin,
    Mixed,
    Insulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    ConstantOne,
    AffinePositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    RobinDisk,
    RobinSquare,
    MixedAnnulus,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, value_enum)]
    shape: Shape,
    #[arg(long)]
    n: usize,
    /// Inner radius, annulus only.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// A mesh file or generator parameters.
#[derive(Debug, Clone, Args)]
pub struct MeshSource {
    #[arg(long, conflicts_with_all = ["shape", "n", "r0"])]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    shape: Option<Shape>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r0: Option<f64>,
}

/// Robin thickness: a constant or a `vertex value` file.
#[derive(Debug, Clone, Args)]
pub struct ProfileSource {
    #[arg(long, conflicts_with = "h_file")]
    h: Option<f64>,
    #[arg(long)]
    h_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Rerun the parameters recorded in a manifest.
    #[arg(long, conflicts_with_all = ["problem", "mesh", "shape", "h", "h_file", "mass", "rtol", "max_steps", "init", "init_file", "cg_tol", "cg_max_iter"])]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "manifest")]
    problem: Option<Problem>,
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    profile: ProfileSource,
    /// Total insulation mass.
    #[arg(long, conflicts_with_all = ["h", "h_file"])]
    mass: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, value_enum, conflicts_with = "init_file")]
    init: Option<Init>,
    /// Initial vector, one value per line.
    #[arg(long)]
    init_file: Option<PathBuf>,
    /// Relative residual target of the linear solver.
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    cg_max_iter: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    profile: ProfileSource,
    /// Eigenvector output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long = "case", value_enum)]
    case: Case,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(args) => commands::mesh(args),
        Command::Solve(args) => commands::solve(args),
        Command::Oracle(args) => commands::oracle(args),
        Command::Baseline(args) => commands::baseline(args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
