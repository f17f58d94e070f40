use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::loss;
use super::model::{Gradients, Mode, Model};
use super::{classify, Hyperparams};
use crate::error::{Error, Result};
use crate::eval::{confusion, prf};
use crate::features::Dataset;
use crate::label::Label;

/// Adam state with bias-corrected moments.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(hp: &Hyperparams, parameters: usize) -> Self {
        Adam {
            lr: hp.learning_rate,
            beta1: hp.adam_beta1,
            beta2: hp.adam_beta2,
            eps: hp.adam_epsilon,
            step: 0,
            m: vec![0.0; parameters],
            v: vec![0.0; parameters],
        }
    }

    pub fn step(&mut self, model: &mut Model, grads: &Gradients) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let g = grads
            .layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias));
        for (((p, g), m), v) in model.params_mut().zip(g).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_precision: Option<f64>,
    pub val_recall: Option<f64>,
    pub val_f1: Option<f64>,
}

pub type History = Vec<EpochRecord>;

struct ValScore {
    loss: f64,
    precision: f64,
    recall: f64,
    f1: f64,
}

fn validate(model: &Model, val: &Dataset, weights: [f64; 2]) -> Result<ValScore> {
    let probs = model.predict_scaled(val.values())?;
    let flat: Vec<f64> = probs.iter().flat_map(|p| [p.p_same, p.p_split]).collect();
    let predicted: Vec<Label> = probs.iter().map(|&p| classify(p, 0.5)).collect();
    let m = prf(&confusion(&predicted, val.labels())?);
    Ok(ValScore {
        loss: loss(&flat, val.labels(), weights),
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
    })
}

/// Mini-batch Adam on the class-weighted cross-entropy.
///
/// Both datasets must already be scaled. Rows are reshuffled every epoch and
/// dropout masks are drawn from the same seeded stream, so a run is a pure
/// function of its inputs. When `val` is non-empty, the model with the best
/// validation Split-F1 (ties broken by lower validation loss) is returned
/// and training stops after `early_stop_patience` epochs without
/// improvement. The returned model keeps the scaler of `model`.
pub fn train(model: &Model, train: &Dataset, val: &Dataset, hp: &Hyperparams) -> Result<(Model, History)> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    for d in [train, val] {
        if !d.is_empty() && d.width() != model.input_dim() {
            return Err(Error::Dimension {
                expected: model.input_dim(),
                got: d.width(),
            });
        }
    }
    let weights = hp.class_weights.resolve(train.class_counts());
    info!(
        "training on {} rows ({} split), class weights same={:.6} split={:.6}",
        train.len(),
        train.class_counts().split,
        weights[0],
        weights[1]
    );

    let mut current = model.clone();
    let mut adam = Adam::new(hp, current.parameter_count());
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let width = train.width();
    let mut history = History::new();

    let mut best: Option<(f64, f64, Model, usize)> = None;
    let mut since_best = 0usize;
    let mut batch_x = Vec::with_capacity(hp.batch_size * width);
    let mut batch_y = Vec::with_capacity(hp.batch_size);

    for epoch in 1..=hp.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(hp.batch_size).enumerate() {
            batch_x.clear();
            batch_y.clear();
            for &i in chunk {
                batch_x.extend_from_slice(train.row(i));
                batch_y.push(train.labels()[i]);
            }
            let (value, grads) = current.loss_and_grad(&batch_x, &batch_y, weights, Mode::Train(&mut rng))?;
            if !value.is_finite() || grads.flat().iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            loss_sum += value * chunk.len() as f64;
            adam.step(&mut current, &grads);
        }
        let train_loss = loss_sum / train.len() as f64;

        let mut record = EpochRecord {
            epoch,
            train_loss,
            val_loss: None,
            val_precision: None,
            val_recall: None,
            val_f1: None,
        };
        let mut stop = false;
        if !val.is_empty() {
            let s = validate(&current, val, weights)?;
            record.val_loss = Some(s.loss);
            record.val_precision = Some(s.precision);
            record.val_recall = Some(s.recall);
            record.val_f1 = Some(s.f1);
            let improved = match &best {
                None => true,
                Some((f1, l, _, _)) => s.f1 > *f1 || (s.f1 == *f1 && s.loss < *l),
            };
            if improved {
                best = Some((s.f1, s.loss, current.clone(), epoch));
                since_best = 0;
            } else {
                since_best += 1;
                stop = since_best >= hp.early_stop_patience;
            }
        }
        debug!("epoch {epoch}: {record:?}");
        history.push(record);
        if stop {
            info!("early stop after epoch {epoch}");
            break;
        }
    }

    let epochs_run = history.len();
    let (mut out, best_epoch) = match best {
        Some((_, _, m, e)) => (m, e),
        None => (current, epochs_run),
    };
    out.meta.seed = hp.seed;
    out.meta.epochs_run = epochs_run;
    out.meta.best_epoch = best_epoch;
    out.meta.hyperparams = Some(hp.clone());
    out.meta.class_weights = Some(hp.class_weights);
    out.meta.class_weight_values = Some(weights);
    out.meta.final_train_loss = history.last().map(|r| r.train_loss);
    out.meta.final_val_loss = history.last().and_then(|r| r.val_loss);
    Ok((out, history))
}
