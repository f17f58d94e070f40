use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{loss, softmax_rows};
use super::{Architecture, ClassWeights, Hyperparams, ProbPair};
use crate::error::{Error, Result};
use crate::features::{Dataset, Scaler};
use crate::label::Label;

/// Dense layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// `out[r, o] = bias[o] + sum_i x[r, i] * weights[o, i]`.
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() / self.inputs;
        let mut out = Vec::with_capacity(n * self.outputs);
        for row in x.chunks_exact(self.inputs) {
            for (w, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
                out.push(b + dot(row, w));
            }
        }
        out
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Provenance of a trained model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub hyperparams: Option<Hyperparams>,
    pub class_weights: Option<ClassWeights>,
    /// `[w_same, w_split]` actually used.
    pub class_weight_values: Option<[f64; 2]>,
    pub final_train_loss: Option<f64>,
    pub final_val_loss: Option<f64>,
    /// Free-form additions from the caller (split mode, dataset hash, ...).
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub architecture: Architecture,
    pub layers: Vec<Layer>,
    /// Applied to raw features by [`Model::predict`].
    pub scaler: Option<Scaler>,
    pub meta: TrainingMeta,
}

/// Per-layer gradients, shaped like [`Model::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

/// Forward-pass mode. Training mode draws dropout masks from the given RNG.
pub enum Mode<'a> {
    Infer,
    Train(&'a mut ChaCha8Rng),
}

/// He-normal weights (variance `2 / fan_in`), zero biases.
pub fn init_model(arch: &Architecture, seed: u64) -> Result<Model> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = arch
        .layer_dims
        .windows(2)
        .map(|d| {
            let (inputs, outputs) = (d[0], d[1]);
            let normal = Normal::new(0.0, (2.0 / inputs as f64).sqrt()).expect("valid std");
            let mut layer = Layer::zeros(inputs, outputs);
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
            layer
        })
        .collect();
    Ok(Model {
        architecture: arch.clone(),
        layers,
        scaler: None,
        meta: TrainingMeta {
            seed,
            ..TrainingMeta::default()
        },
    })
}

/// Intermediate values kept for backpropagation.
struct Trace {
    /// Input to each layer, after dropout.
    inputs: Vec<Vec<f64>>,
    /// Dropout scale per input element (0 or 1/(1-p)); `None` when no dropout.
    masks: Vec<Option<Vec<f64>>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl Model {
    pub fn input_dim(&self) -> usize {
        self.architecture.input_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_batch(&self, x: &[f64]) -> Result<usize> {
        let d = self.input_dim();
        if !x.len().is_multiple_of(d) {
            return Err(Error::Dimension {
                expected: d,
                got: x.len(),
            });
        }
        Ok(x.len() / d)
    }

    fn run(&self, x: &[f64], mode: Mode<'_>) -> Trace {
        let (p, mut rng) = match mode {
            Mode::Train(rng) if self.architecture.dropout > 0.0 => (self.architecture.dropout, Some(rng)),
            _ => (0.0, None),
        };
        let act = self.architecture.activation;
        let last = self.layers.len() - 1;
        let mut trace = Trace {
            inputs: Vec::with_capacity(self.layers.len()),
            masks: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(last),
            probs: Vec::new(),
        };
        let mut a = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mask = rng.as_mut().map(|rng| {
                let keep = 1.0 / (1.0 - p);
                let m: Vec<f64> = (0..a.len())
                    .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
                    .collect();
                a.iter_mut().zip(&m).for_each(|(v, s)| *v *= s);
                m
            });
            let z = layer.affine(&a);
            trace.inputs.push(a);
            trace.masks.push(mask);
            if li == last {
                trace.probs = softmax_rows(&z, 2);
                break;
            }
            a = z.iter().map(|&v| act.apply(v)).collect();
            trace.pre.push(z);
        }
        trace
    }

    /// Row-major `n x 2` probabilities (Same, Split) for a row-major batch
    /// of already-scaled features.
    pub fn forward(&self, x: &[f64], mode: Mode<'_>) -> Result<Vec<f64>> {
        self.check_batch(x)?;
        Ok(self.run(x, mode).probs)
    }

    /// Weighted cross-entropy of a batch and its gradient with respect to
    /// every parameter.
    pub fn loss_and_grad(
        &self,
        x: &[f64],
        labels: &[Label],
        weights: [f64; 2],
        mode: Mode<'_>,
    ) -> Result<(f64, Gradients)> {
        let n = self.check_batch(x)?;
        if n != labels.len() {
            return Err(Error::LengthMismatch {
                left: n,
                right: labels.len(),
            });
        }
        let trace = self.run(x, mode);
        let value = loss(&trace.probs, labels, weights);

        // dL/dz for the output logits: w_y / n * (p - onehot(y))
        let mut delta: Vec<f64> = Vec::with_capacity(2 * n);
        for (p, y) in trace.probs.chunks_exact(2).zip(labels) {
            let scale = weights[y.index()] / n as f64;
            let c = y.index();
            for (k, pk) in p.iter().enumerate() {
                delta.push(scale * (pk - if k == c { 1.0 } else { 0.0 }));
            }
        }

        let act = self.architecture.activation;
        let mut grads: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &trace.inputs[li];
            let g = &mut grads[li];
            for (d_row, a_row) in delta.chunks_exact(layer.outputs).zip(input.chunks_exact(layer.inputs)) {
                for (o, &d) in d_row.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, a_row, &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs]);
                    }
                    g.bias[o] += d;
                }
            }
            if li == 0 {
                break;
            }
            // back through this layer's weights, the dropout mask, and the
            // previous hidden activation
            let mut prev = vec![0.0; n * layer.inputs];
            for (d_row, p_row) in delta.chunks_exact(layer.outputs).zip(prev.chunks_exact_mut(layer.inputs)) {
                for (o, &d) in d_row.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, &layer.weights[o * layer.inputs..(o + 1) * layer.inputs], p_row);
                    }
                }
            }
            if let Some(mask) = &trace.masks[li] {
                prev.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
            }
            prev.iter_mut()
                .zip(&trace.pre[li - 1])
                .for_each(|(v, &z)| *v *= act.derivative(z));
            delta = prev;
        }
        Ok((value, Gradients { layers: grads }))
    }

    /// Probabilities for rows that are already scaled. Rows are processed in
    /// parallel chunks; results do not depend on the thread count.
    pub fn predict_scaled(&self, x: &[f64]) -> Result<Vec<ProbPair>> {
        self.check_batch(x)?;
        let chunk = 512 * self.input_dim();
        let probs: Vec<Vec<f64>> = x
            .par_chunks(chunk.max(1))
            .map(|c| self.run(c, Mode::Infer).probs)
            .collect();
        Ok(probs
            .iter()
            .flat_map(|p| p.chunks_exact(2))
            .map(|p| ProbPair {
                p_same: p[0],
                p_split: p[1],
            })
            .collect())
    }

    /// Probabilities for raw (unscaled) dataset rows; applies the model's
    /// scaler when it has one.
    pub fn predict(&self, features: &Dataset) -> Result<Vec<ProbPair>> {
        if features.width() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: features.width(),
            });
        }
        match &self.scaler {
            Some(s) => self.predict_scaled(s.apply(features)?.values()),
            None => self.predict_scaled(features.values()),
        }
    }

    /// Scales and classifies a single raw feature row.
    pub fn predict_row(&self, row: &[f64]) -> Result<ProbPair> {
        let mut r = row.to_vec();
        if let Some(s) = &self.scaler {
            if r.len() != self.input_dim() {
                return Err(Error::Dimension {
                    expected: self.input_dim(),
                    got: r.len(),
                });
            }
            s.apply_row(&mut r);
        }
        Ok(self.predict_scaled(&r)?[0])
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    /// Parameter `i` in the order of [`Gradients::flat`].
    pub(crate) fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }
}
