//! Fully-connected change-point classifier, written from scratch.
//!
//! Hidden layers are affine maps followed by a rectifier (or tanh). During
//! training, inverted dropout is applied to the network input and to every
//! hidden activation. The output layer is a two-way softmax over
//! (Same, Split). Parameters are learned with mini-batch Adam on a
//! class-weighted cross-entropy loss.

mod gradcheck;
mod loss;
mod model;
mod persist;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ClassCounts;
use crate::label::Label;

pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{loss, softmax_rows};
pub use model::{init_model, Gradients, Layer, Mode, Model, TrainingMeta};
pub use persist::{load_model, model_from_bytes, model_to_bytes, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use train::{train, Adam, EpochRecord, History};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            // NaN passes through so a poisoned batch surfaces in the loss
            Activation::Relu => {
                if z < 0.0 {
                    0.0
                } else {
                    z
                }
            }
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub layer_dims: Vec<usize>,
    pub dropout: f64,
    pub activation: Activation,
}

impl Default for Architecture {
    /// 613 → 307 → 154 → 77 → 2, dropout 0.5, rectifier.
    fn default() -> Self {
        Architecture::for_input(613)
    }
}

impl Architecture {
    /// Three hidden layers, each half (rounded up) the width of the one
    /// before, then a two-way output.
    pub fn for_input(input_len: usize) -> Self {
        let mut dims = vec![input_len];
        for _ in 0..3 {
            let prev = *dims.last().unwrap();
            dims.push(prev.div_ceil(2).max(1));
        }
        dims.push(2);
        Architecture {
            layer_dims: dims,
            dropout: 0.5,
            activation: Activation::Relu,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 {
            return Err(Error::Config("architecture needs at least input and output layers".into()));
        }
        if self.layer_dims.contains(&0) {
            return Err(Error::Config("layer dimensions must be positive".into()));
        }
        if *self.layer_dims.last().unwrap() != 2 {
            return Err(Error::Config("output layer must have 2 units".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

/// How class weights of the loss are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassWeights {
    /// Proportional to the inverse class count, normalized to sum to 2.
    PaperInverse,
    Uniform,
    Explicit { same: f64, split: f64 },
}

impl ClassWeights {
    /// Resolved `[w_same, w_split]` for the given training counts. Inverse
    /// weighting falls back to uniform when a class is absent.
    pub fn resolve(&self, counts: ClassCounts) -> [f64; 2] {
        match *self {
            ClassWeights::Uniform => [1.0, 1.0],
            ClassWeights::Explicit { same, split } => [same, split],
            ClassWeights::PaperInverse => {
                if counts.same == 0 || counts.split == 0 {
                    return [1.0, 1.0];
                }
                let inv_same = 1.0 / counts.same as f64;
                let inv_split = 1.0 / counts.split as f64;
                let z = 2.0 / (inv_same + inv_split);
                [inv_same * z, inv_split * z]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub early_stop_patience: usize,
    pub seed: u64,
    pub class_weights: ClassWeights,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 256,
            epochs: 20,
            early_stop_patience: 3,
            seed: 0,
            class_weights: ClassWeights::PaperInverse,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be finite and non-negative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if let ClassWeights::Explicit { same, split } = self.class_weights {
            if !(same >= 0.0 && split >= 0.0) {
                return Err(Error::Config("class weights must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Softmax output for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbPair {
    pub p_same: f64,
    pub p_split: f64,
}

/// `Split` iff `p_split > threshold`; an exact tie goes to `Same`.
pub fn classify(p: ProbPair, threshold: f64) -> Label {
    if p.p_split > threshold {
        Label::Split
    } else {
        Label::Same
    }
}
