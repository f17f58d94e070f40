use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use textcpd::corpus::{load_dir, ParseOptions};
use textcpd::embeddings::EmbeddingTable;
use textcpd::features::{encode_corpus_with, write_cache, CacheMeta, EncodeConfig, CACHE_FORMAT_VERSION};
use textcpd::{Error, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::Global;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of conversation CSV files.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Word vectors in `.vec` text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Dataset cache to write; the metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clamp malformed timestamps instead of rejecting the file.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturizeRun {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub lenient: bool,
    pub encode: EncodeConfig,
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    p.clone().ok_or_else(|| Error::Config(format!("featurize needs --{flag}")))
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: FeaturizeRun = global.config.section("featurize")?;
    set(&mut cfg.corpus, args.corpus.map(Some));
    set(&mut cfg.embeddings, args.embeddings.map(Some));
    set(&mut cfg.out, args.out.map(Some));
    cfg.lenient |= args.lenient;
    cfg.encode.validate()?;
    let corpus_dir = required(&cfg.corpus, "corpus")?;
    let emb_path = required(&cfg.embeddings, "embeddings")?;
    let out = required(&cfg.out, "out")?;
    let seed = resolve_seed(global.seed, &global.config, 0)?;

    let corpus = load_dir(&corpus_dir, ParseOptions { lenient: cfg.lenient })?;
    let table = EmbeddingTable::load(&emb_path)?;
    let dataset = encode_corpus_with(&corpus, &table, &cfg.encode);
    if dataset.is_empty() {
        log::warn!("no conversation has {} or more tokens; writing an empty cache", cfg.encode.window_size);
    }
    let stats = table.stats();
    let counts = dataset.class_counts();
    let meta = CacheMeta {
        format_version: CACHE_FORMAT_VERSION,
        embedding_dim: table.dim(),
        window_size: cfg.encode.window_size,
        feature_len: dataset.width(),
        min_duration: cfg.encode.min_duration,
        clamp_rules: CacheMeta::clamp_rules(cfg.encode.min_duration),
        scaled: false,
        corpus_hash: corpus.content_hash(),
        rows: dataset.len(),
        class_counts: counts,
        lookups: stats.lookups,
        oov: stats.misses,
        oov_rate: stats.oov_rate(),
        provenance: dataset.provenance().to_vec(),
        conversation_speakers: corpus.speakers_by_conversation(),
    };
    write_cache(&dataset, &meta, &out)?;
    write_run_config("featurize", seed, &cfg, &run_config_path(&out, false))?;

    global.say(format!("conversations {}", corpus.len()));
    global.say(format!("windows {}", dataset.len()));
    global.say(format!("feature_len {}", dataset.width()));
    global.say(format!("same {}", counts.same));
    global.say(format!("split {}", counts.split));
    global.say(format!("split_fraction {:.6}", counts.split_fraction()));
    global.say(format!("oov_rate {:.6} ({} of {} lookups)", stats.oov_rate(), stats.misses, stats.lookups));
    Ok(())
}
