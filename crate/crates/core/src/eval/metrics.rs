use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Counts with `Split` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with `Same` taken as the positive class.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }
}

pub fn confusion(predicted: &[Label], gold: &[Label]) -> Result<ConfusionMatrix> {
    if predicted.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: gold.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    for (p, g) in predicted.iter().zip(gold) {
        match (p, g) {
            (Label::Split, Label::Split) => m.tp += 1,
            (Label::Split, Label::Same) => m.fp += 1,
            (Label::Same, Label::Split) => m.fn_ += 1,
            (Label::Same, Label::Same) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Precision, recall and F1. A 0/0 ratio is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
    pub f1_degenerate: bool,
}

pub fn prf(m: &ConfusionMatrix) -> Prf {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (precision, precision_degenerate) = ratio(m.tp, m.tp + m.fp);
    let (recall, recall_degenerate) = ratio(m.tp, m.tp + m.fn_);
    let (f1, f1_degenerate) = if precision + recall > 0.0 {
        (2.0 * precision * recall / (precision + recall), false)
    } else {
        (0.0, true)
    };
    Prf {
        precision,
        recall,
        f1,
        precision_degenerate,
        recall_degenerate,
        f1_degenerate,
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::*;

    #[test]
    fn hand_counted_prf() {
        let m = ConfusionMatrix { tp: 4, fp: 1, fn_: 1, tn: 10 };
        let p = prf(&m);
        assert!((p.precision - 0.8).abs() < 1e-15);
        assert!((p.recall - 0.8).abs() < 1e-15);
        assert!((p.f1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn all_correct() {
        let gold = [Split, Same, Same, Split];
        let p = prf(&confusion(&gold, &gold).unwrap());
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn constant_same_is_degenerate() {
        let gold = [Split, Same, Same];
        let m = confusion(&[Same; 3], &gold).unwrap();
        let p = prf(&m);
        assert_eq!(p.recall, 0.0);
        assert_eq!(p.precision, 0.0);
        assert!(p.precision_degenerate && !p.recall_degenerate && p.f1_degenerate);
        assert!((m.accuracy() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion(&[Same], &[]).is_err());
    }

    #[test]
    fn mean_std_example() {
        let (m, s) = mean_std(&[0.8, 1.0]);
        assert!((m - 0.9).abs() < 1e-15);
        assert!((s - 0.1).abs() < 1e-15);
        assert_eq!(mean_std(&[0.7; 10]), (0.7, 0.0));
    }

    fn label() -> impl Strategy<Value = Label> {
        prop_oneof![Just(Same), Just(Split)]
    }

    proptest! {
        #[test]
        fn confusion_is_permutation_invariant(
            pairs in prop::collection::vec((label(), label()), 0..60),
            rot in 0usize..60,
        ) {
            let (p, g): (Vec<Label>, Vec<Label>) = pairs.iter().copied().unzip();
            let base = confusion(&p, &g).unwrap();
            let mut shuffled = pairs.clone();
            if !shuffled.is_empty() {
                let k = rot % shuffled.len();
                shuffled.rotate_left(k);
                shuffled.reverse();
            }
            let (p2, g2): (Vec<Label>, Vec<Label>) = shuffled.into_iter().unzip();
            prop_assert_eq!(base, confusion(&p2, &g2).unwrap());
            prop_assert_eq!(base.total(), pairs.len());
        }

        #[test]
        fn self_agreement_is_perfect(mut x in prop::collection::vec(label(), 2..40)) {
            x[0] = Same;
            x[1] = Split;
            let p = prf(&confusion(&x, &x).unwrap());
            prop_assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        }
    }
}
