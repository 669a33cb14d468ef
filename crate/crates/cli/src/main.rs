//! `ranging`: waveform synthesis, bounds, ambiguity surfaces, channel plans,
//! delay estimation and simulation from the command line.
//!
//! Every subcommand reads its parameters from flags, optionally overridden
//! by a JSON file passed with `--config`, and writes CSV or JSON to `--out`
//! (stdout when absent). Exit status is 2 for usage or configuration errors
//! and 1 when the computation itself fails.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{AmbiguityArgs, CrlbArgs, EstimateArgs, MonteCarloArgs, PlanArgs, SimulateArgs, WaveArgs};
use crate::figures::FiguresArgs;
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "ranging", version, about = "Spectrally-sparse ranging waveforms, bounds and simulation")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// JSON file whose keys override the subcommand's flags. May also set
    /// `seed`, `out` and `format`. Unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (a directory for `figures`). Defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a waveform; JSON gives its spec, CSV its I/Q samples.
    Waveform(WaveArgs),
    /// Delay-Doppler ambiguity surface.
    Ambiguity(AmbiguityArgs),
    /// Delay-variance bound of the scaled TTSFW over a range of pulse counts.
    Crlb(CrlbArgs),
    /// Frequency-division channel plan for simultaneous node pairs.
    Plan(PlanArgs),
    /// Delay and range from recorded I/Q captures.
    Estimate(EstimateArgs),
    /// Multi-node scenario, or the two-slave repeater sweep by default.
    Simulate(SimulateArgs),
    /// Simulated delay variance against the bound, over pulse count or SNR.
    Montecarlo(MonteCarloArgs),
    /// Regenerate every canned data series into a directory.
    Figures(FiguresArgs),
}

/// Resolved global options.
pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration; nothing was computed.
    Usage(String),
    Compute(String),
}

impl From<ranging::Error> for Failure {
    fn from(e: ranging::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("RANGING_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("RANGING_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Compute(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let mut file = config::load(cli.config.as_deref())?;
    let globals = Globals {
        seed: file.take_global("seed")?.or(cli.seed),
        out: file.take_global("out")?.or(cli.out),
        format: file.take_global("format")?.or(cli.format),
    };
    match cli.command {
        Command::Waveform(a) => commands::waveform(&file.apply(a)?, &globals),
        Command::Ambiguity(a) => commands::ambiguity(&file.apply(a)?, &globals),
        Command::Crlb(a) => commands::crlb(&file.apply(a)?, &globals),
        Command::Plan(a) => commands::plan(&file.apply(a)?, &globals),
        Command::Estimate(a) => commands::estimate(&file.apply(a)?, &globals),
        Command::Simulate(a) => commands::simulate(&file.apply(a)?, &globals),
        Command::Montecarlo(a) => commands::montecarlo(&file.apply(a)?, &globals),
        Command::Figures(a) => figures::run(&file.apply(a)?, &globals),
    }
}

fn main() -> ExitCode {
    // clap prints usage and exits with status 2 on bad flags.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
