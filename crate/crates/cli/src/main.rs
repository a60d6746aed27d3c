//! `evsynth` — fit, sweep and diagnose evidence-synthesis models from the
//! command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use evsynth_core::config::ConfigError;
use evsynth_core::diagnostics::DiagnosticsError;
use evsynth_core::model::ModelError;
use evsynth_core::network::NetworkError;
use evsynth_core::posterior::PosteriorError;
use evsynth_core::sampler::SamplerError;
use evsynth_core::synth::SynthError;

/// Exit codes: 0 ok, 1 analysis error, 2 input/IO error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] NetworkError),
    #[error("{0}")]
    Analysis(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Input(_) | CliError::Config(_) | CliError::Dataset(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "evsynth",
    version,
    about = "Bayesian network meta-analysis of randomized and real-world count data",
    after_help = "Parallelism is capped by the EVSYNTH_THREADS environment variable."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a dataset; exit 0 only when it is fit-ready.
    Validate {
        /// Run config (or a bare dataset CSV path via [data] in the config).
        #[arg(long)]
        config: PathBuf,
        /// Emit the validation report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Fit one model and write the result bundle.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "alphas")]
        alpha: Option<f64>,
        /// Comma-separated alpha grid (sweep-style configs).
        #[arg(long)]
        alphas: Option<String>,
        /// Model variant: rct_only | pooled | power_prior | hier2 | hier3 | hier_power.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit across a down-weighting grid and write sweep tables and plots.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split one comparison into direct and indirect evidence and test agreement.
    Nodesplit {
        #[arg(long)]
        config: PathBuf,
        /// Edge to split, as `base:head` treatment labels.
        #[arg(long)]
        edge: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the comparison network as DOT and SVG.
    Diagram {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset from a truth config.
    Simulate {
        /// Truth config ([truth] and [layout] sections).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("EVSYNTH_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config, json } => commands::cmd_validate(&config, json),
        Command::Fit {
            config,
            seed,
            alpha,
            alphas,
            model,
            out,
        } => commands::cmd_fit(&config, seed, alpha, alphas.as_deref(), model.as_deref(), out.as_deref()),
        Command::Sweep {
            config,
            seed,
            alphas,
            model,
            out,
        } => commands::cmd_sweep(&config, seed, alphas.as_deref(), model.as_deref(), out.as_deref()),
        Command::Nodesplit {
            config,
            edge,
            seed,
            model,
            out,
        } => commands::cmd_nodesplit(&config, &edge, seed, model.as_deref(), out.as_deref()),
        Command::Diagram { config, out } => commands::cmd_diagram(&config, out.as_deref()),
        Command::Simulate { config, seed, out } => commands::cmd_simulate(&config, seed, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
