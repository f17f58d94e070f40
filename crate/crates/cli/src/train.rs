use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use textcpd::corpus::SplitMode;
use textcpd::features::read_cache;
use textcpd::nn::{save_model, Activation, Architecture, ClassWeights, History, Hyperparams};
use textcpd::pipeline::{fit, TrainSetup};
use textcpd::{Error, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::Global;

pub fn parse_split_mode(s: &str) -> std::result::Result<SplitMode, String> {
    match s {
        "by-window" => Ok(SplitMode::ByWindow),
        "by-conversation" => Ok(SplitMode::ByConversation),
        _ => Err(format!("unknown split mode {s:?} (by-window | by-conversation)")),
    }
}

fn parse_activation(s: &str) -> std::result::Result<Activation, String> {
    match s {
        "relu" => Ok(Activation::Relu),
        "tanh" => Ok(Activation::Tanh),
        _ => Err(format!("unknown activation {s:?} (relu | tanh)")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WeightChoice {
    Uniform,
    PaperInverse,
    /// Uses `--weight-same` and `--weight-split`.
    Explicit,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Dataset cache written by `featurize`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model file; a `.json` extension selects the JSON variant.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-epoch history CSV (default `<out>.history.csv`).
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, value_parser = parse_split_mode)]
    split_mode: Option<SplitMode>,
    /// Training fraction of windows (by-window) or speakers (by-conversation).
    #[arg(long)]
    ratio: Option<f64>,
    /// Fraction of training rows held out for early stopping.
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Train on unscaled timing features.
    #[arg(long)]
    no_scaler: bool,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long, value_parser = parse_activation)]
    activation: Option<Activation>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long, value_enum)]
    class_weights: Option<WeightChoice>,
    #[arg(long)]
    weight_same: Option<f64>,
    #[arg(long)]
    weight_split: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainRun {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub history: Option<PathBuf>,
    pub split_mode: SplitMode,
    pub ratio: f64,
    pub val_fraction: f64,
    pub scaler: bool,
    pub hidden: Option<Vec<usize>>,
    pub dropout: f64,
    pub activation: Activation,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub class_weights: WeightChoice,
    pub weight_same: f64,
    pub weight_split: f64,
}

impl Default for TrainRun {
    fn default() -> Self {
        let setup = TrainSetup::default();
        let hp = Hyperparams::default();
        let arch = Architecture::default();
        TrainRun {
            data: None,
            out: None,
            history: None,
            split_mode: setup.mode,
            ratio: setup.ratio,
            val_fraction: setup.val_fraction,
            scaler: setup.use_scaler,
            hidden: None,
            dropout: arch.dropout,
            activation: arch.activation,
            learning_rate: hp.learning_rate,
            adam_beta1: hp.adam_beta1,
            adam_beta2: hp.adam_beta2,
            adam_epsilon: hp.adam_epsilon,
            batch_size: hp.batch_size,
            epochs: hp.epochs,
            patience: hp.early_stop_patience,
            class_weights: WeightChoice::PaperInverse,
            weight_same: 1.0,
            weight_split: 1.0,
        }
    }
}

impl TrainRun {
    fn setup(&self, input_len: usize, seed: u64) -> TrainSetup {
        let mut arch = Architecture::for_input(input_len);
        if let Some(h) = &self.hidden {
            arch.layer_dims = std::iter::once(input_len).chain(h.iter().copied()).chain([2]).collect();
        }
        arch.dropout = self.dropout;
        arch.activation = self.activation;
        TrainSetup {
            ratio: self.ratio,
            mode: self.split_mode,
            val_fraction: self.val_fraction,
            use_scaler: self.scaler,
            architecture: Some(arch),
            hyperparams: Hyperparams {
                learning_rate: self.learning_rate,
                adam_beta1: self.adam_beta1,
                adam_beta2: self.adam_beta2,
                adam_epsilon: self.adam_epsilon,
                batch_size: self.batch_size,
                epochs: self.epochs,
                early_stop_patience: self.patience,
                seed,
                class_weights: match self.class_weights {
                    WeightChoice::Uniform => ClassWeights::Uniform,
                    WeightChoice::PaperInverse => ClassWeights::PaperInverse,
                    WeightChoice::Explicit => ClassWeights::Explicit {
                        same: self.weight_same,
                        split: self.weight_split,
                    },
                },
            },
        }
    }
}

pub fn history_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".history.csv");
    PathBuf::from(s)
}

pub fn write_history(history: &History, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(["epoch", "train_loss", "val_loss", "val_precision", "val_recall", "val_f1"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            opt(r.val_loss),
            opt(r.val_precision),
            opt(r.val_recall),
            opt(r.val_f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: TrainRun = global.config.section("train")?;
    set(&mut cfg.data, args.data.map(Some));
    set(&mut cfg.out, args.out.map(Some));
    set(&mut cfg.history, args.history.map(Some));
    set(&mut cfg.split_mode, args.split_mode);
    set(&mut cfg.ratio, args.ratio);
    set(&mut cfg.val_fraction, args.val_fraction);
    if args.no_scaler {
        cfg.scaler = false;
    }
    set(&mut cfg.hidden, args.hidden.map(Some));
    set(&mut cfg.dropout, args.dropout);
    set(&mut cfg.activation, args.activation);
    set(&mut cfg.learning_rate, args.lr);
    set(&mut cfg.batch_size, args.batch_size);
    set(&mut cfg.epochs, args.epochs);
    set(&mut cfg.patience, args.patience);
    set(&mut cfg.class_weights, args.class_weights);
    set(&mut cfg.weight_same, args.weight_same);
    set(&mut cfg.weight_split, args.weight_split);
    let seed = resolve_seed(global.seed, &global.config, 0)?;
    if !(0.0..1.0).contains(&cfg.val_fraction) {
        return Err(Error::Config(format!("validation fraction {} outside [0, 1)", cfg.val_fraction)));
    }

    let data_path = cfg.data.clone().ok_or_else(|| Error::Config("train needs --data".into()))?;
    let out = cfg.out.clone().ok_or_else(|| Error::Config("train needs --out".into()))?;
    let history_out = cfg.history.clone().unwrap_or_else(|| history_path(&out));
    let (dataset, meta) = read_cache(&data_path)?;
    if dataset.is_empty() {
        return Err(Error::Empty("dataset cache has no rows"));
    }
    let setup = cfg.setup(dataset.width(), seed);
    if let Some(a) = &setup.architecture {
        a.validate()?;
    }

    let fitted = fit(&dataset, &meta.conversation_speakers, &setup).map_err(|e| {
        if let Error::NonFiniteLoss { epoch, batch } = e {
            log::error!("training diverged at epoch {epoch}, batch {batch}; try a lower --lr or check the cache for non-finite values");
        }
        e
    })?;
    let mut model = fitted.model;
    let split = &fitted.split;
    let mut extra: BTreeMap<String, Value> = BTreeMap::new();
    extra.insert("split_mode".into(), serde_json::to_value(setup.mode)?);
    extra.insert("split_ratio".into(), json!(setup.ratio));
    extra.insert("split_seed".into(), json!(seed));
    extra.insert("val_fraction".into(), json!(setup.val_fraction));
    extra.insert("corpus_hash".into(), json!(meta.corpus_hash));
    extra.insert("feature_len".into(), json!(meta.feature_len));
    extra.insert("train_rows".into(), json!(fitted.fit_rows.len()));
    extra.insert("val_rows".into(), json!(fitted.val_rows.len()));
    extra.insert("test_rows".into(), json!(split.test.len()));
    extra.insert("excluded_rows".into(), json!(split.excluded.len()));
    extra.insert("test_speakers".into(), json!(split.test_speakers));
    model.meta.extra = extra;

    save_model(&model, &out)?;
    write_history(&fitted.history, &history_out)?;
    write_run_config("train", seed, &cfg, &run_config_path(&out, false))?;

    global.say(format!("train_rows {}", fitted.fit_rows.len()));
    global.say(format!("val_rows {}", fitted.val_rows.len()));
    global.say(format!("test_rows {}", split.test.len()));
    global.say(format!("epochs_run {}", model.meta.epochs_run));
    global.say(format!("best_epoch {}", model.meta.best_epoch));
    if let Some(r) = fitted.history.iter().find(|r| r.epoch == model.meta.best_epoch) {
        if let Some(f1) = r.val_f1 {
            global.say(format!("val_f1 {f1:.6}"));
        }
    }
    Ok(())
}
