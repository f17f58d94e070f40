use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{confusion, mean_std, prf, ConfusionMatrix, Prf};
use super::roc::{roc, RocSet};
use crate::error::{Error, Result};
use crate::features::{ClassCounts, Dataset};
use crate::label::Label;
use crate::nn::Model;

/// Anything that assigns a Split score in [0, 1] to each dataset row.
pub trait Scorer {
    fn name(&self) -> String;

    /// One score per row of `features` (raw, unscaled features).
    fn scores(&self, features: &Dataset) -> Result<Vec<f64>>;
}

impl Scorer for Model {
    fn name(&self) -> String {
        "neural".into()
    }

    fn scores(&self, features: &Dataset) -> Result<Vec<f64>> {
        Ok(self.predict(features)?.into_iter().map(|p| p.p_split).collect())
    }
}

/// Passes gold labels through as scores; a self-test for the harness.
pub struct OracleScorer;

impl Scorer for OracleScorer {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn scores(&self, features: &Dataset) -> Result<Vec<f64>> {
        Ok(features
            .labels()
            .iter()
            .map(|l| if l.is_split() { 1.0 } else { 0.0 })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucSet {
    pub split: Option<f64>,
    pub same: Option<f64>,
    pub micro: Option<f64>,
    #[serde(rename = "macro")]
    pub macro_: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scorer: String,
    pub rows: usize,
    pub class_counts: ClassCounts,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    /// Metrics with Split as the positive class.
    pub split: Prf,
    /// Metrics with Same as the positive class.
    pub same: Prf,
    pub accuracy: f64,
    pub auc: AucSet,
    pub roc: RocSet,
    pub oov_rate: Option<f64>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// Builds a report from scores and the predictions derived from them.
pub fn evaluate_scores(
    scorer: &str,
    scores: &[f64],
    predicted: &[Label],
    gold: &[Label],
    threshold: f64,
) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let cm = confusion(predicted, gold)?;
    let curves = roc(scores, gold)?;
    let auc = AucSet {
        split: curves.split.as_ref().map(|c| c.auc),
        same: curves.same.as_ref().map(|c| c.auc),
        micro: curves.micro.as_ref().map(|c| c.auc),
        macro_: curves.macro_.as_ref().map(|c| c.auc),
    };
    Ok(EvalReport {
        scorer: scorer.to_string(),
        rows: gold.len(),
        class_counts: ClassCounts::of(gold),
        threshold,
        confusion: cm,
        split: prf(&cm),
        same: prf(&cm.flipped()),
        accuracy: cm.accuracy(),
        auc,
        roc: curves,
        oov_rate: None,
        metadata: BTreeMap::new(),
    })
}

/// Scores `test` and classifies each row as Split iff its score exceeds
/// `threshold`.
pub fn evaluate(scorer: &dyn Scorer, test: &Dataset, threshold: f64) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let scores = scorer.scores(test)?;
    let predicted: Vec<Label> = scores
        .iter()
        .map(|&s| if s > threshold { Label::Split } else { Label::Same })
        .collect();
    evaluate_scores(&scorer.name(), &scores, &predicted, test.labels(), threshold)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc_split: Option<f64>,
    pub auc_micro: Option<f64>,
    pub auc_macro: Option<f64>,
}

/// Mean and population standard deviation of each metric over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedSummary {
    pub runs: usize,
    pub mean: MetricSummary,
    pub std: MetricSummary,
}

pub fn summarize(reports: &[EvalReport]) -> RepeatedSummary {
    let col = |f: &dyn Fn(&EvalReport) -> f64| mean_std(&reports.iter().map(f).collect::<Vec<_>>());
    let opt = |f: &dyn Fn(&EvalReport) -> Option<f64>| {
        let v: Vec<f64> = reports.iter().filter_map(f).collect();
        if v.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&v);
            (Some(m), Some(s))
        }
    };
    let (p, ps) = col(&|r| r.split.precision);
    let (rc, rs) = col(&|r| r.split.recall);
    let (f, fs) = col(&|r| r.split.f1);
    let (a, as_) = col(&|r| r.accuracy);
    let (au, aus) = opt(&|r| r.auc.split);
    let (mi, mis) = opt(&|r| r.auc.micro);
    let (ma, mas) = opt(&|r| r.auc.macro_);
    RepeatedSummary {
        runs: reports.len(),
        mean: MetricSummary {
            precision: p,
            recall: rc,
            f1: f,
            accuracy: a,
            auc_split: au,
            auc_micro: mi,
            auc_macro: ma,
        },
        std: MetricSummary {
            precision: ps,
            recall: rs,
            f1: fs,
            accuracy: as_,
            auc_split: aus,
            auc_micro: mis,
            auc_macro: mas,
        },
    }
}
