//! End-to-end training on an encoded dataset: split, hold out a validation
//! slice, fit the scaler on training rows only, initialize and train.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{split_rows, RowSplit, SplitMode};
use crate::error::{Error, Result};
use crate::features::{Dataset, Scaler};
use crate::nn::{init_model, train, Architecture, History, Hyperparams, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSetup {
    /// Fraction of rows (by-window) or speakers (by-conversation) used for training.
    pub ratio: f64,
    pub mode: SplitMode,
    /// Fraction of the training rows held out for early stopping.
    pub val_fraction: f64,
    pub use_scaler: bool,
    /// Defaults to [`Architecture::for_input`] of the dataset width.
    pub architecture: Option<Architecture>,
    pub hyperparams: Hyperparams,
}

impl Default for TrainSetup {
    fn default() -> Self {
        TrainSetup {
            ratio: 0.8,
            mode: SplitMode::ByWindow,
            val_fraction: 0.1,
            use_scaler: true,
            architecture: None,
            hyperparams: Hyperparams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: Model,
    pub history: History,
    pub split: RowSplit,
    /// Rows used for gradient steps and for early stopping.
    pub fit_rows: Vec<usize>,
    pub val_rows: Vec<usize>,
}

/// Splits `dataset` reproducibly from `setup.hyperparams.seed`.
pub fn split_dataset(
    dataset: &Dataset,
    speakers: &BTreeMap<String, BTreeSet<String>>,
    ratio: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<RowSplit> {
    split_rows(&dataset.row_conversations(), speakers, ratio, mode, seed)
}

/// Carves a validation slice out of `train_rows`. Returns (fit, val).
pub fn hold_out(train_rows: &[usize], val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if val_fraction <= 0.0 || train_rows.len() < 2 {
        return Ok((train_rows.to_vec(), Vec::new()));
    }
    let ids = vec![String::new(); train_rows.len()];
    let s = split_rows(&ids, &BTreeMap::new(), 1.0 - val_fraction, SplitMode::ByWindow, seed)?;
    Ok((
        s.train.iter().map(|&i| train_rows[i]).collect(),
        s.test.iter().map(|&i| train_rows[i]).collect(),
    ))
}

/// Trains on the training side of an existing split.
pub fn fit_split(dataset: &Dataset, split: RowSplit, setup: &TrainSetup) -> Result<Fitted> {
    let seed = setup.hyperparams.seed;
    if split.train.is_empty() {
        return Err(Error::Empty("training split"));
    }
    let (fit_rows, val_rows) = hold_out(&split.train, setup.val_fraction, seed.wrapping_add(1))?;
    let fit_raw = dataset.select(&fit_rows);
    let val_raw = dataset.select(&val_rows);
    let scaler = if setup.use_scaler {
        Some(Scaler::fit(&fit_raw)?)
    } else {
        None
    };
    let (fit_ds, val_ds) = match &scaler {
        Some(s) => (s.apply(&fit_raw)?, s.apply(&val_raw)?),
        None => (fit_raw, val_raw),
    };
    let arch = setup
        .architecture
        .clone()
        .unwrap_or_else(|| Architecture::for_input(dataset.width()));
    let init = init_model(&arch, seed)?;
    let (mut model, history) = train(&init, &fit_ds, &val_ds, &setup.hyperparams)?;
    model.scaler = scaler;
    Ok(Fitted {
        model,
        history,
        split,
        fit_rows,
        val_rows,
    })
}

/// Split, then [`fit_split`].
pub fn fit(
    dataset: &Dataset,
    speakers: &BTreeMap<String, BTreeSet<String>>,
    setup: &TrainSetup,
) -> Result<Fitted> {
    let split = split_dataset(dataset, speakers, setup.ratio, setup.mode, setup.hyperparams.seed)?;
    fit_split(dataset, split, setup)
}
