use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use textcpd::corpus::{parse_conversation_with, ParseOptions};
use textcpd::embeddings::EmbeddingTable;
use textcpd::features::{encode_tokens, windows_sized, EncodeConfig};
use textcpd::nn::load_model;
use textcpd::{Error, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::Global;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Conversation CSV (`word,speaker,start,end` or `word,start,end`).
    #[arg(long)]
    conversation: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Merge detections closer than this many seconds, keeping the most probable.
    #[arg(long)]
    nms: Option<f64>,
    /// Output CSV `time,probability`; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentRun {
    pub model: Option<PathBuf>,
    pub conversation: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub threshold: f64,
    pub nms: Option<f64>,
    pub out: Option<PathBuf>,
    pub lenient: bool,
}

impl Default for SegmentRun {
    fn default() -> Self {
        SegmentRun {
            model: None,
            conversation: None,
            embeddings: None,
            threshold: 0.5,
            nms: None,
            out: None,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePoint {
    pub time: f64,
    pub probability: f64,
}

/// Greedy suppression: detections are visited from most to least probable
/// (earlier first on ties) and kept unless a kept one lies within `radius`
/// seconds. The result is in time order.
pub fn suppress(points: &[ChangePoint], radius: f64) -> Vec<ChangePoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .probability
            .total_cmp(&points[a].probability)
            .then(points[a].time.total_cmp(&points[b].time))
    });
    let mut kept: Vec<ChangePoint> = Vec::new();
    for i in order {
        let p = points[i];
        if kept.iter().all(|k| (k.time - p.time).abs() > radius) {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| a.time.total_cmp(&b.time));
    kept
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    p.clone().ok_or_else(|| Error::Config(format!("segment needs --{flag}")))
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: SegmentRun = global.config.section("segment")?;
    set(&mut cfg.model, args.model.map(Some));
    set(&mut cfg.conversation, args.conversation.map(Some));
    set(&mut cfg.embeddings, args.embeddings.map(Some));
    set(&mut cfg.threshold, args.threshold);
    set(&mut cfg.nms, args.nms.map(Some));
    set(&mut cfg.out, args.out.map(Some));
    cfg.lenient |= args.lenient;
    if let Some(r) = cfg.nms {
        if !(r >= 0.0) {
            return Err(Error::Config(format!("--nms radius {r} must be non-negative")));
        }
    }
    let seed = resolve_seed(global.seed, &global.config, 0)?;

    let model = load_model(&required(&cfg.model, "model")?)?;
    let conv_path = required(&cfg.conversation, "conversation")?;
    let table = EmbeddingTable::load(&required(&cfg.embeddings, "embeddings")?)?;
    let bytes = fs::read(&conv_path).map_err(|e| Error::File {
        path: conv_path.clone(),
        source: e,
    })?;
    let id = conv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let conv = parse_conversation_with(&bytes, &id, ParseOptions { lenient: cfg.lenient })?;

    let enc = EncodeConfig::default();
    let expected = enc.feature_len(table.dim());
    if model.input_dim() != expected {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: expected,
        });
    }
    let mid = enc.window_size / 2;
    let mut points = Vec::new();
    for w in windows_sized(&conv, enc.window_size) {
        let fv = encode_tokens(&w.tokens, &table, enc.min_duration, w.label);
        let p = model.predict_row(&fv.values)?;
        if p.p_split > cfg.threshold {
            let time = (w.tokens[mid - 1].end + w.tokens[mid].start) / 2.0;
            points.push(ChangePoint {
                time,
                probability: p.p_split,
            });
        }
    }
    if let Some(r) = cfg.nms {
        points = suppress(&points, r);
    }

    let mut text = String::from("time,probability\n");
    for p in &points {
        text.push_str(&format!("{},{}\n", p.time, p.probability));
    }
    match &cfg.out {
        Some(out) => {
            fs::write(out, &text).map_err(|e| Error::File {
                path: out.clone(),
                source: e,
            })?;
            write_run_config("segment", seed, &cfg, &run_config_path(out, false))?;
            global.say(format!("change_points {}", points.len()));
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
