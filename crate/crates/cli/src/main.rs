//! `conjtok` command-line pipeline.

mod commands;
mod config;
mod pipeline;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{Flags, PipelineConfig};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0:#}")]
    Data(#[from] anyhow::Error),
    #[error("threshold not met: {0}")]
    Threshold(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Threshold(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "conjtok", version, about = "Lossless conjugation-aware tokenization of Japanese corpora")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode MeCab output under a tokenization scheme.
    Encode,
    /// Restore surface words from an encoded token stream.
    Decode,
    /// Build the lemma lexicon needed for decoding.
    Lexicon,
    /// Learn BPE merges from segmented text.
    BpeLearn,
    /// Apply BPE merges, or undo them with --reverse.
    BpeApply {
        #[arg(long)]
        reverse: bool,
    },
    /// Count tokens and write the frequency-ranked vocabulary.
    Vocab,
    /// Report vocabulary coverage of one scheme.
    Coverage,
    /// Compare vocabulary statistics of every scheme.
    Compare,
    /// Check that every predicate and sentence survives encode and decode.
    Roundtrip,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = PipelineConfig::resolve(&cli.flags)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot start worker pool: {e}")))?;
    for line in cfg.describe().lines() {
        log::debug!("{line}");
    }
    match &cli.command {
        Command::Encode => commands::encode(&cfg),
        Command::Decode => commands::decode(&cfg),
        Command::Lexicon => commands::lexicon(&cfg),
        Command::BpeLearn => commands::bpe_learn(&cfg),
        Command::BpeApply { reverse } => commands::bpe_apply(&cfg, *reverse),
        Command::Vocab => commands::vocab(&cfg),
        Command::Coverage => commands::coverage_cmd(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::Roundtrip => commands::roundtrip(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
