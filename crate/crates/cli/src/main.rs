//! `fembed`: band analysis, synthesis and verification from one
//! configuration document.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use floquet_embed::synth::Mode;
use floquet_embed::Error;

use commands::Context;
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("target set violates A1: {0}")]
    A1(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::A1(_) => 3,
            CliError::Numerical(_) | CliError::Output(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Classification(c) => CliError::A1(c.to_string()),
            Error::InvalidArgument(_) | Error::Plan(_) => CliError::Config(e.to_string()),
            Error::Io(_) | Error::Format { .. } => CliError::Input(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

const EXIT_AUDIT: u8 = 5;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Practical,
}

#[derive(Debug, Parser)]
#[command(name = "fembed", version, about = "Embedded eigenvalues for perturbed periodic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true, default_value = "fembed.json")]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized lemma suites; overrides `lemmas.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Constant selection; overrides `mode.kind`.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// End of the synthesis interval; overrides `run.x_max`.
    #[arg(long = "x-max", global = true)]
    x_max: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band edges of the background potential.
    Bands,
    /// Quasi-eigenvalues of the configured targets.
    Eigen,
    /// Plan and synthesize the perturbation; writes the potential and reports.
    Synth,
    /// Trace targets and probes through a synthesized potential.
    Verify {
        /// Potential file (`x,V` CSV or structured JSON); defaults to
        /// `potential.csv` in the output directory.
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Randomized audits of the oscillatory-integral bounds.
    Lemmas,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(m) = cli.mode {
        config.mode.kind = match m {
            ModeArg::Paper => Mode::PaperFaithful,
            ModeArg::Practical => Mode::Practical,
        };
    }
    if let Some(x) = cli.x_max {
        config.run.x_max = x;
    }
    if let Some(s) = cli.seed {
        config.lemmas.seed = s;
    }
    config.validate()?;
    let out = cli.out.unwrap_or_else(|| config.output.directory.clone());
    let ctx = Context { config, out };
    match cli.command {
        Command::Bands => commands::bands(&ctx),
        Command::Eigen => commands::eigen(&ctx),
        Command::Synth => commands::synth(&ctx),
        Command::Verify { potential } => {
            let path = potential.unwrap_or_else(|| ctx.out.join("potential.csv"));
            commands::verify(&ctx, &path)
        }
        Command::Lemmas => commands::lemmas(&ctx, ctx.config.lemmas.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_AUDIT),
        Err(e) => {
            eprintln!("fembed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
