//! Batch front door for the heart-sound robustness toolkit.
//!
//! Subcommands: `gen-noise`, `gen-surrogate`, `build-dataset`,
//! `extract-features`, `train`, `evaluate`, `report`. Exit codes: 0 success,
//! 2 usage or validation error, 3 refusal to overwrite existing outputs,
//! 4 runtime failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pcgbench", version, about = "Noise-robustness benchmarking for heart-sound classifiers")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Globals {
    /// Master seed for commands that do not take an explicit one.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = logical cores). Parallelism never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Overwrite existing outputs instead of refusing with exit code 3.
    #[arg(long, global = true)]
    force: bool,
    /// JSON experiment config consumed by train/evaluate (flags override it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a catalog noise type to a WAV file.
    GenNoise(commands::GenNoiseArgs),
    /// Synthesize a surrogate heart sound to a WAV file.
    GenSurrogate(commands::GenSurrogateArgs),
    /// Execute a dataset recipe: mixed WAVs plus manifest.csv.
    BuildDataset(commands::BuildDatasetArgs),
    /// Dump per-segment feature matrices for a manifest.
    ExtractFeatures(commands::ExtractFeaturesArgs),
    /// Train a classifier and save the model container.
    Train(commands::TrainArgs),
    /// Evaluate a model (or repeated retrainings) into facet reports.
    Evaluate(commands::EvaluateArgs),
    /// Build facet reports from a saved predictions CSV.
    Report(commands::ReportArgs),
}

/// Error carrying the process exit code.
pub enum CliError {
    /// Bad arguments, unreadable inputs, schema violations (exit 2).
    Usage(String),
    /// Output exists and --force was not given (exit 3).
    Overwrite(String),
    /// Failure during execution (exit 4).
    Runtime(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Overwrite(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),* $(,)?) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.into())
            }
        }
    )*};
}

runtime_from!(
    anyhow::Error,
    std::io::Error,
    serde_json::Error,
    csv::Error,
    pcgbench_core::signal::SignalError,
    pcgbench_core::noise::NoiseError,
    pcgbench_core::mix::MixError,
    pcgbench_core::dataset::DatasetError,
    pcgbench_core::features::FeatureError,
    pcgbench_core::models::ModelError,
    pcgbench_core::report::ReportError,
    pcgbench_core::experiment::ExperimentError,
);

pub type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    if cli.globals.jobs > 0 {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.globals.jobs)
            .build_global();
    }

    let result = match cli.command {
        Command::GenNoise(args) => commands::gen_noise(&cli.globals, args),
        Command::GenSurrogate(args) => commands::gen_surrogate(&cli.globals, args),
        Command::BuildDataset(args) => commands::build_dataset(&cli.globals, args),
        Command::ExtractFeatures(args) => commands::extract_features(&cli.globals, args),
        Command::Train(args) => commands::train(&cli.globals, args),
        Command::Evaluate(args) => commands::evaluate(&cli.globals, args),
        Command::Report(args) => commands::report(&cli.globals, args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Overwrite(msg) => {
                    eprintln!("error: {msg} (pass --force to overwrite)")
                }
                CliError::Runtime(err) => eprintln!("error: {err:#}"),
            }
            ExitCode::from(e.code())
        }
    }
}
