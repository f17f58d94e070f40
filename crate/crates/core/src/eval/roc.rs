use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// FPR grid size used to average the per-class curves.
pub const MACRO_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RocVariant {
    Split,
    Same,
    Micro,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub variant: RocVariant,
    /// (false positive rate, true positive rate), from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// All four curves for one set of scores. Per-class and macro curves are
/// `None` when the gold labels contain only one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSet {
    pub split: Option<RocCurve>,
    pub same: Option<RocCurve>,
    pub micro: Option<RocCurve>,
    #[serde(rename = "macro")]
    pub macro_: Option<RocCurve>,
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Binary ROC: thresholds sweep the distinct scores in descending order,
/// tied scores enter together. `None` unless both classes are present.
pub fn roc_binary(scores: &[f64], positive: &[bool], variant: RocVariant) -> Option<RocCurve> {
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = trapezoid(&points);
    Some(RocCurve { variant, points, auc })
}

/// TPR of `curve` at `x`: the highest point at exactly `x`, otherwise linear
/// interpolation between the neighbouring points.
fn tpr_at(curve: &[(f64, f64)], x: f64) -> f64 {
    let upto = curve.partition_point(|p| p.0 <= x);
    if upto == 0 {
        return 0.0;
    }
    let left = curve[upto - 1];
    if left.0 == x || upto == curve.len() {
        return left.1;
    }
    let right = curve[upto];
    left.1 + (right.1 - left.1) * (x - left.0) / (right.0 - left.0)
}

fn macro_average(a: &RocCurve, b: &RocCurve) -> RocCurve {
    let mut points = vec![(0.0, 0.0)];
    for k in 0..MACRO_GRID_POINTS {
        let x = k as f64 / (MACRO_GRID_POINTS - 1) as f64;
        points.push((x, (tpr_at(&a.points, x) + tpr_at(&b.points, x)) / 2.0));
    }
    let auc = trapezoid(&points);
    RocCurve {
        variant: RocVariant::Macro,
        points,
        auc,
    }
}

/// Curves for Split scores `p_split` against gold labels. The Same curve
/// scores each instance by `1 - p_split`; the micro curve pools both
/// classes' indicator/score pairs; the macro curve averages the two
/// per-class curves on a 101-point FPR grid.
pub fn roc(scores: &[f64], gold: &[Label]) -> Result<RocSet> {
    if scores.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: gold.len(),
        });
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Config(format!("non-finite score {bad}")));
    }
    let is_split: Vec<bool> = gold.iter().map(|l| l.is_split()).collect();
    let is_same: Vec<bool> = is_split.iter().map(|s| !s).collect();
    let same_scores: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();

    let split = roc_binary(scores, &is_split, RocVariant::Split);
    let same = roc_binary(&same_scores, &is_same, RocVariant::Same);

    let pooled_scores: Vec<f64> = scores.iter().chain(&same_scores).copied().collect();
    let pooled_pos: Vec<bool> = is_split.iter().chain(&is_same).copied().collect();
    let micro = roc_binary(&pooled_scores, &pooled_pos, RocVariant::Micro);

    let macro_ = match (&split, &same) {
        (Some(a), Some(b)) => Some(macro_average(a, b)),
        _ => None,
    };
    Ok(RocSet {
        split,
        same,
        micro,
        macro_,
    })
}
