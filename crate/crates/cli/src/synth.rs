use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use textcpd::corpus::{generate_synthetic, write_dir, SynthConfig};
use textcpd::{Error, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::Global;

pub const EMBEDDINGS_FILE: &str = "embeddings.vec";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory: one CSV per conversation plus `embeddings.vec`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    conversations: Option<usize>,
    #[arg(long)]
    speakers: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    words_per_turn: Option<f64>,
    #[arg(long)]
    turns: Option<f64>,
    /// Radius of each speaker's embedding cluster.
    #[arg(long)]
    spread: Option<f64>,
    /// Silence between turns, in seconds.
    #[arg(long)]
    pause: Option<f64>,
    #[arg(long)]
    rate_min: Option<f64>,
    #[arg(long)]
    rate_max: Option<f64>,
    #[arg(long)]
    speakers_per_conversation: Option<usize>,
    #[arg(long)]
    vocab_per_speaker: Option<usize>,
    #[arg(long)]
    shared_vocab: Option<usize>,
    #[arg(long)]
    shared_prob: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthRun {
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub corpus: SynthConfig,
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: SynthRun = global.config.section("synth")?;
    set(&mut cfg.out, args.out.map(Some));
    let c = &mut cfg.corpus;
    set(&mut c.n_conversations, args.conversations);
    set(&mut c.n_speakers, args.speakers);
    set(&mut c.embedding_dim, args.dim);
    set(&mut c.words_per_turn_mean, args.words_per_turn);
    set(&mut c.turn_count_mean, args.turns);
    set(&mut c.speaker_topic_spread, args.spread);
    set(&mut c.pause_at_turn, args.pause);
    set(&mut c.speech_rate_range.0, args.rate_min);
    set(&mut c.speech_rate_range.1, args.rate_max);
    set(&mut c.speakers_per_conversation, args.speakers_per_conversation);
    set(&mut c.vocab_per_speaker, args.vocab_per_speaker);
    set(&mut c.shared_vocab_size, args.shared_vocab);
    set(&mut c.shared_word_prob, args.shared_prob);
    c.seed = resolve_seed(global.seed, &global.config, c.seed)?;

    let out = cfg.out.clone().ok_or_else(|| Error::Config("synth needs --out".into()))?;
    let (corpus, table) = generate_synthetic(&cfg.corpus)?;
    fs::create_dir_all(&out).map_err(|e| Error::File {
        path: out.clone(),
        source: e,
    })?;
    write_dir(&corpus, &out)?;
    table.save(&out.join(EMBEDDINGS_FILE))?;
    write_run_config("synth", cfg.corpus.seed, &cfg, &run_config_path(&out, true))?;

    let tokens = corpus.token_count();
    let turns: usize = corpus.conversations().iter().map(|c| c.speaker_turns()).sum();
    global.say(format!("conversations {}", corpus.len()));
    global.say(format!("tokens {tokens}"));
    global.say(format!("speaker_turns {turns}"));
    global.say(format!("turn_rate {:.6}", turns as f64 / tokens.max(1) as f64));
    global.say(format!("vocabulary {}", table.len()));
    Ok(())
}
