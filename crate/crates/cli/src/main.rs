//! Command-line pipeline for push-broom line-scan imagery: synthetic data
//! generation, shift estimation and rectification, clock synchronization,
//! tie-point matching and boresight calibration.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 low-confidence
//! time synchronization, 4 insufficient matches, 5 solver failure,
//! 1 other errors.

mod commands;
mod config;
mod dataset;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn low_confidence(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }

    pub fn insufficient_matches(message: impl Into<String>) -> Self {
        Self::new(4, message)
    }

    pub fn solver_failure(message: impl Into<String>) -> Self {
        Self::new(5, message)
    }
}

impl From<pushbroom_core::Error> for CliError {
    fn from(err: pushbroom_core::Error) -> Self {
        use pushbroom_core::Error;
        let code = match &err {
            Error::InsufficientMatches { .. } => 4,
            Error::FilterFailure(_) => 4,
            Error::Numerical(_) => 5,
            _ => 1,
        };
        Self::new(code, err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "pushbroom",
    about = "Push-broom imagery rectification, tie points and boresight calibration",
    version
)]
struct Cli {
    /// Cap the worker thread count (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with ground truth from a config file.
    Synth {
        /// TOML simulation config.
        #[arg(long)]
        config: PathBuf,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate per-line shifts, accumulate and resample the cube.
    Rectify(commands::rectify::RectifyArgs),
    /// Recover the camera-to-trajectory clock offset from shifts and roll.
    Timesync(commands::timesync::TimesyncArgs),
    /// Detect, match and filter tie points between two chunks.
    Match(commands::match_cmd::MatchArgs),
    /// Solve the boresight from tie points, with bootstrap uncertainty.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Benchmark experiments.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Shift-estimation error versus patch width, per kernel and for the
    /// correlation baseline.
    Patchwidth(commands::bench::PatchwidthArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth { config, out } => commands::synth::run(&config, &out),
        Command::Rectify(args) => commands::rectify::run(&args),
        Command::Timesync(args) => commands::timesync::run(&args),
        Command::Match(args) => commands::match_cmd::run(&args),
        Command::Calibrate(args) => commands::calibrate::run(&args),
        Command::Bench(BenchCommand::Patchwidth(args)) => commands::bench::run_patchwidth(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
