use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use textcpd::baselines::{majority_classify, KnnIndex};
use textcpd::corpus::{RowSplit, SplitMode};
use textcpd::eval::{evaluate_scores, summarize, EvalReport, OracleScorer, RepeatedSummary, Scorer};
use textcpd::features::{read_cache, Scaler};
use textcpd::nn::{model_from_bytes, Model};
use textcpd::pipeline::split_dataset;
use textcpd::{Error, Label, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::train::parse_split_mode;
use crate::Global;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    Knn,
    Majority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Resample {
    /// Re-run the identical evaluation.
    None,
    /// Draw the test rows with replacement, seeded per repetition.
    Bootstrap,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dataset cache written by `featurize`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated baselines to run on the same split.
    #[arg(long, value_enum, value_delimiter = ',')]
    baselines: Option<Vec<Baseline>>,
    /// Neighbourhood sizes for the k-NN baseline.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    repeat: Option<usize>,
    #[arg(long, value_enum)]
    resample: Option<Resample>,
    /// Override the split recorded in the model.
    #[arg(long, value_parser = parse_split_mode)]
    split_mode: Option<SplitMode>,
    #[arg(long)]
    ratio: Option<f64>,
    /// Score with the gold labels instead of a model (harness self-test).
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalRun {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threshold: f64,
    pub baselines: Vec<Baseline>,
    pub k: Vec<usize>,
    pub repeat: usize,
    pub resample: Resample,
    pub split_mode: Option<SplitMode>,
    pub ratio: Option<f64>,
    pub oracle: bool,
}

impl Default for EvalRun {
    fn default() -> Self {
        EvalRun {
            model: None,
            data: None,
            out: None,
            threshold: 0.5,
            baselines: Vec::new(),
            k: vec![1, 3, 5, 7, 9],
            repeat: 1,
            resample: Resample::None,
            split_mode: None,
            ratio: None,
            oracle: false,
        }
    }
}

#[derive(Debug, Serialize)]
struct SplitInfo {
    mode: SplitMode,
    ratio: f64,
    seed: u64,
    train_rows: usize,
    test_rows: usize,
    excluded_rows: usize,
    test_speakers: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Repeated {
    runs: usize,
    resample: Resample,
    summaries: BTreeMap<String, RepeatedSummary>,
}

#[derive(Debug, Serialize)]
struct Report {
    format_version: u32,
    model_sha256: Option<String>,
    corpus_hash: String,
    threshold: f64,
    split: SplitInfo,
    model: EvalReport,
    baselines: Vec<EvalReport>,
    repeat: Option<Repeated>,
}

/// Scores from one scorer; `rescore` recomputes them for a repeated run.
struct Entry<'a> {
    name: String,
    scores: Vec<f64>,
    rescore: Box<dyn Fn() -> Result<Vec<f64>> + 'a>,
}

fn predictions(scores: &[f64], threshold: f64) -> Vec<Label> {
    scores
        .iter()
        .map(|&s| if s > threshold { Label::Split } else { Label::Same })
        .collect()
}

fn meta_value<'a>(model: Option<&'a Model>, key: &str) -> Option<&'a Value> {
    model.and_then(|m| m.meta.extra.get(key))
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: EvalRun = global.config.section("eval")?;
    set(&mut cfg.model, args.model.map(Some));
    set(&mut cfg.data, args.data.map(Some));
    set(&mut cfg.out, args.out.map(Some));
    set(&mut cfg.threshold, args.threshold);
    set(&mut cfg.baselines, args.baselines);
    set(&mut cfg.k, args.k);
    set(&mut cfg.repeat, args.repeat);
    set(&mut cfg.resample, args.resample);
    set(&mut cfg.split_mode, args.split_mode.map(Some));
    set(&mut cfg.ratio, args.ratio.map(Some));
    cfg.oracle |= args.oracle;
    if cfg.repeat == 0 {
        return Err(Error::Config("--repeat must be at least 1".into()));
    }
    if let Some(&k) = cfg.k.iter().find(|&&k| k == 0 || k.is_multiple_of(2)) {
        return Err(Error::Config(format!("k = {k} must be odd and positive")));
    }

    let data_path = cfg.data.clone().ok_or_else(|| Error::Config("eval needs --data".into()))?;
    let (dataset, meta) = read_cache(&data_path)?;
    let (model, model_hash) = match &cfg.model {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| Error::File {
                path: p.clone(),
                source: e,
            })?;
            let hash = hex::encode(Sha256::digest(&bytes));
            (Some(model_from_bytes(&bytes)?), Some(hash))
        }
        None if cfg.oracle => (None, None),
        None => return Err(Error::Config("eval needs --model (or --oracle)".into())),
    };
    if let Some(m) = &model {
        if m.input_dim() != dataset.width() {
            return Err(Error::Dimension {
                expected: m.input_dim(),
                got: dataset.width(),
            });
        }
    }

    let recorded_seed = meta_value(model.as_ref(), "split_seed")
        .and_then(Value::as_u64)
        .or(model.as_ref().map(|m| m.meta.seed))
        .unwrap_or(0);
    let seed = resolve_seed(global.seed, &global.config, recorded_seed)?;
    let mode = match cfg.split_mode {
        Some(m) => m,
        None => match meta_value(model.as_ref(), "split_mode") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => SplitMode::ByWindow,
        },
    };
    let ratio = cfg
        .ratio
        .or_else(|| meta_value(model.as_ref(), "split_ratio").and_then(Value::as_f64))
        .unwrap_or(0.8);
    let split: RowSplit = split_dataset(&dataset, &meta.conversation_speakers, ratio, mode, seed)?;
    let test = dataset.select(&split.test);
    let train = dataset.select(&split.train);
    if test.is_empty() {
        return Err(Error::Empty("test split"));
    }

    let threshold = cfg.threshold;
    let primary: Box<dyn Scorer> = match model {
        Some(m) if !cfg.oracle => Box::new(m),
        _ => Box::new(OracleScorer),
    };
    let primary_ref = &*primary;
    let test_ref = &test;
    let mut knn_index = None;
    if cfg.baselines.contains(&Baseline::Knn) {
        let ks: Vec<usize> = cfg.k.iter().copied().filter(|&k| k <= train.len()).collect();
        if ks.len() < cfg.k.len() {
            log::warn!("skipping k larger than the {} training rows", train.len());
        }
        if !ks.is_empty() {
            let scaler = Scaler::fit(&train)?;
            knn_index = Some((KnnIndex::from_dataset(&train, ks[0], Some(scaler))?, ks));
        }
    }
    let mut entries: Vec<Entry> = vec![Entry {
        name: primary.name(),
        scores: primary.scores(&test)?,
        rescore: Box::new(move || primary_ref.scores(test_ref)),
    }];
    if let Some((idx, ks)) = &knn_index {
        let fractions = idx.split_fractions(&test, ks)?;
        for (j, (&k, scores)) in ks.iter().zip(fractions).enumerate() {
            entries.push(Entry {
                name: format!("knn-{k}"),
                scores,
                rescore: Box::new(move || Ok(idx.split_fractions(test_ref, ks)?.swap_remove(j))),
            });
        }
    }
    if cfg.baselines.contains(&Baseline::Majority) {
        let m = majority_classify(train.class_counts());
        entries.push(Entry {
            name: m.name(),
            scores: m.scores(&test)?,
            rescore: Box::new(move || m.scores(test_ref)),
        });
    }

    let report_for = |e: &Entry, scores: &[f64], gold: &[Label]| -> Result<EvalReport> {
        let mut r = evaluate_scores(&e.name, scores, &predictions(scores, threshold), gold, threshold)?;
        r.oov_rate = Some(meta.oov_rate);
        Ok(r)
    };
    let mut reports: Vec<EvalReport> = entries
        .iter()
        .map(|e| report_for(e, &e.scores, test.labels()))
        .collect::<Result<_>>()?;

    let repeat = if cfg.repeat > 1 {
        let mut summaries = BTreeMap::new();
        for e in &entries {
            let mut runs = Vec::with_capacity(cfg.repeat);
            for i in 0..cfg.repeat {
                let r = match cfg.resample {
                    Resample::None => report_for(e, &(e.rescore)()?, test.labels())?,
                    Resample::Bootstrap => {
                        let (s, g) = bootstrap(&e.scores, test.labels(), seed.wrapping_add(i as u64));
                        report_for(e, &s, &g)?
                    }
                };
                runs.push(r);
            }
            summaries.insert(e.name.clone(), summarize(&runs));
        }
        Some(Repeated {
            runs: cfg.repeat,
            resample: cfg.resample,
            summaries,
        })
    } else {
        None
    };

    let model_report = reports.remove(0);
    let report = Report {
        format_version: REPORT_FORMAT_VERSION,
        model_sha256: model_hash,
        corpus_hash: meta.corpus_hash.clone(),
        threshold,
        split: SplitInfo {
            mode,
            ratio,
            seed,
            train_rows: split.train.len(),
            test_rows: split.test.len(),
            excluded_rows: split.excluded.len(),
            test_speakers: split.test_speakers.iter().cloned().collect(),
        },
        model: model_report,
        baselines: reports,
        repeat,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &cfg.out {
        Some(out) => {
            fs::write(out, &text).map_err(|e| Error::File {
                path: out.clone(),
                source: e,
            })?;
            write_run_config("eval", seed, &cfg, &run_config_path(out, false))?;
            for r in std::iter::once(&report.model).chain(&report.baselines) {
                global.say(format!(
                    "{:<10} precision {:.4} recall {:.4} f1 {:.4} accuracy {:.4}",
                    r.scorer, r.split.precision, r.split.recall, r.split.f1, r.accuracy
                ));
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn bootstrap(scores: &[f64], gold: &[Label], seed: u64) -> (Vec<f64>, Vec<Label>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scores.len();
    (0..n)
        .map(|_| {
            let i = rng.random_range(0..n);
            (scores[i], gold[i])
        })
        .unzip()
}
