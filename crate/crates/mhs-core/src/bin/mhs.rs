//! Command-line driver for the magneto-hydrostatic solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mhs_core::cli_io::commands::{cmd_linear, cmd_solve, cmd_verify, RunInputs, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "mhs", version, about = "Magneto-hydrostatic equilibria in a periodic slab")]
struct Cli {
    /// Worker threads, 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed of the randomized contraction estimate.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Solver configuration (key=value).
    #[arg(long)]
    config: PathBuf,
    /// Boundary-data specification; zero data when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write z = 0 and z = L slices of b as CSV tables.
    #[arg(long)]
    slices: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-point solver.
    Solve(RunArgs),
    /// Recompute the diagnostics of a solution directory.
    Verify {
        /// Solution directory written by `solve`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the closed-form linearized solver.
    Linear(RunArgs),
}

fn init_logging() {
    let level = match std::env::var("MHS_LOG").as_deref() {
        Ok("debug") => log::LevelFilter::Debug,
        Ok("info") => log::LevelFilter::Info,
        Ok("quiet") => log::LevelFilter::Off,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start the thread pool: {e}");
        return ExitCode::from(EXIT_VALIDATION as u8);
    }
    let inputs = |a: RunArgs| RunInputs {
        config: a.config,
        data: a.data,
        out: a.out,
        seed: cli.seed,
        slices: a.slices,
    };
    let code = match cli.command {
        Command::Solve(a) => cmd_solve(&inputs(a)),
        Command::Verify { out } => cmd_verify(&out),
        Command::Linear(a) => cmd_linear(&inputs(a)),
    };
    ExitCode::from(code as u8)
}
