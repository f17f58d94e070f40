use serde::{Deserialize, Serialize};

use super::metrics::ConfusionMatrix;
use crate::error::{Error, Result};

/// Change-point errors read off a diarizer's per-segment speaker ids.
///
/// Inside an utterance every segment should carry the id of its first
/// segment; a mismatch is a spurious change (type I). Across consecutive
/// utterances the ids must differ; equality is a missed change (type II).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiarizationErrors {
    pub type1: usize,
    pub type2: usize,
    pub boundary_tp: usize,
    pub within_tn: usize,
}

impl DiarizationErrors {
    /// tp = detected boundaries, fn = type II, fp = type I, tn = consistent segments.
    pub fn confusion(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.boundary_tp,
            fp: self.type1,
            fn_: self.type2,
            tn: self.within_tn,
        }
    }
}

/// `vectors[i]` holds the speaker id assigned to each segment of utterance
/// `i`, utterances in timeline order.
pub fn diarization_to_cpd(vectors: &[Vec<i64>]) -> Result<DiarizationErrors> {
    if vectors.is_empty() {
        return Err(Error::Empty("no utterances"));
    }
    if vectors.iter().any(Vec::is_empty) {
        return Err(Error::Empty("utterance with no segments"));
    }
    let mut e = DiarizationErrors::default();
    for c in vectors {
        for &id in &c[1..] {
            if id != c[0] {
                e.type1 += 1;
            } else {
                e.within_tn += 1;
            }
        }
    }
    for pair in vectors.windows(2) {
        if pair[0].last() == pair[1].first() {
            e.type2 += 1;
        } else {
            e.boundary_tp += 1;
        }
    }
    Ok(e)
}
