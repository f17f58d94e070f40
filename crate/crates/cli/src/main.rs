//! `textcpd`: synthetic corpora, feature caches, training, evaluation and
//! change-point extraction from word-level transcripts.

mod config;
mod diar;
mod eval;
mod featurize;
mod segment;
mod synth;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigFile;

#[derive(Debug, Parser)]
#[command(name = "textcpd", version, about = "Speaker change point detection on word-level transcripts")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with per-subcommand sections; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus and its embedding table.
    Synth(synth::Args),
    /// Window and encode a corpus into a dataset cache.
    Featurize(featurize::Args),
    /// Train the classifier on a dataset cache.
    Train(train::Args),
    /// Evaluate a model (and optional baselines) on its held-out split.
    Eval(eval::Args),
    /// Detect change points in one conversation.
    Segment(segment::Args),
    /// Convert per-segment diarization output into change-point errors.
    DiarEval(diar::Args),
}

/// Settings shared by every subcommand.
pub struct Global {
    pub seed: Option<u64>,
    pub config: ConfigFile,
    pub quiet: bool,
}

impl Global {
    /// Prints a human-readable summary line unless `--quiet`.
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn run(cli: Cli) -> textcpd::Result<()> {
    let global = Global {
        seed: cli.seed,
        config: ConfigFile::load(cli.config.as_deref())?,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Synth(a) => synth::run(a, &global),
        Command::Featurize(a) => featurize::run(a, &global),
        Command::Train(a) => train::run(a, &global),
        Command::Eval(a) => eval::run(a, &global),
        Command::Segment(a) => segment::run(a, &global),
        Command::DiarEval(a) => diar::run(a, &global),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
