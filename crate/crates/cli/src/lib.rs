//! Command-line front end for the shipping-forecast pipeline.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

use clap::{Parser, Subcommand};

pub use config::{CommonArgs, PipelineConfig};
pub use error::{CliError, CliResult, Status};

use commands::corpus::{cmd_corpus, CorpusArgs};
use commands::evaluate::{cmd_evaluate, EvaluateArgs};
use commands::frames::{cmd_render_frames, FramesArgs};
use commands::generate::{cmd_generate, GenerateArgs};
use commands::synth::{cmd_synth, SynthArgs};
use commands::validate::{cmd_validate, ValidateArgs};

#[derive(Parser, Debug)]
#[command(name = "shipcast", version, about = "Shipping-forecast generation, corpus building and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a forecast from gridded fields.
    Generate(GenerateArgs),
    /// Pair archived forecasts with rendered frames and split them.
    Corpus(CorpusArgs),
    /// Score backends or pre-generated text against archived forecasts.
    Evaluate(EvaluateArgs),
    /// Check bulletins against the grammar and content rules.
    Validate(ValidateArgs),
    /// Rasterize fields to frame sets.
    RenderFrames(FramesArgs),
    /// Write synthetic grid bundles.
    Synth(SynthArgs),
}

pub fn run_with_env(cli: &Cli, env: &dyn Fn(&str) -> Option<String>) -> CliResult<Status> {
    let cfg = PipelineConfig::resolve(&cli.common, env)?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, &cfg),
        Command::Corpus(a) => cmd_corpus(a, &cfg),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
        Command::Validate(a) => cmd_validate(a, &cfg),
        Command::RenderFrames(a) => cmd_render_frames(a, &cfg),
        Command::Synth(a) => cmd_synth(a, &cfg),
    }
}

pub fn run(cli: &Cli) -> CliResult<Status> {
    run_with_env(cli, &|k| std::env::var(k).ok())
}
