use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::features::WINDOW_SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Uniformly random fraction of encoded windows.
    ByWindow,
    /// Whole conversations, with no test speaker seen in training.
    ByConversation,
}

/// Train/test partition of dataset rows.
///
/// Row indices refer to the canonical encoding order (conversations sorted by
/// id, then window index). In by-conversation mode, conversations that mix
/// held-out and training speakers belong to neither side and are listed in
/// `excluded`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RowSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub excluded: Vec<usize>,
    pub train_conversations: BTreeSet<String>,
    pub test_conversations: BTreeSet<String>,
    pub excluded_conversations: BTreeSet<String>,
    pub test_speakers: BTreeSet<String>,
}

/// Splits the windows of `corpus` (in canonical encoding order).
pub fn split_corpus(corpus: &Corpus, ratio: f64, mode: SplitMode, seed: u64) -> Result<RowSplit> {
    let mut row_conversations = Vec::new();
    for c in corpus.sorted() {
        let n = c.len().saturating_sub(WINDOW_SIZE - 1);
        row_conversations.extend(std::iter::repeat_n(c.id.clone(), n));
    }
    split_rows(
        &row_conversations,
        &corpus.speakers_by_conversation(),
        ratio,
        mode,
        seed,
    )
}

/// Splits rows given the conversation each row came from and the speakers of
/// every conversation.
///
/// By-window mode sends `round(ratio * rows)` shuffled rows to training.
/// By-conversation mode shuffles conversations and moves them into the test
/// side until it covers `round((1 - ratio) * speakers)` speakers (at least
/// one). Remaining conversations go to training when they share no speaker
/// with the test side, to test when all their speakers are already held out,
/// and are excluded otherwise.
pub fn split_rows(
    row_conversations: &[String],
    speakers: &BTreeMap<String, BTreeSet<String>>,
    ratio: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<RowSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        SplitMode::ByWindow => {
            let n = row_conversations.len();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let n_train = (ratio * n as f64).round() as usize;
            let mut train = idx[..n_train].to_vec();
            let mut test = idx[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok(RowSplit {
                train,
                test,
                ..RowSplit::default()
            })
        }
        SplitMode::ByConversation => {
            let mut ids: Vec<&String> = speakers.keys().collect();
            let all_speakers: BTreeSet<&String> = speakers.values().flatten().collect();
            let target = (((1.0 - ratio) * all_speakers.len() as f64).round() as usize).max(1);
            ids.shuffle(&mut rng);

            let mut split = RowSplit::default();
            let mut rest = Vec::new();
            for id in ids {
                if split.test_speakers.len() < target {
                    split.test_speakers.extend(speakers[id].iter().cloned());
                    split.test_conversations.insert(id.clone());
                } else {
                    rest.push(id);
                }
            }
            for id in rest {
                let spk = &speakers[id];
                if spk.is_disjoint(&split.test_speakers) {
                    split.train_conversations.insert(id.clone());
                } else if spk.is_subset(&split.test_speakers) {
                    split.test_conversations.insert(id.clone());
                } else {
                    split.excluded_conversations.insert(id.clone());
                }
            }
            if split.train_conversations.is_empty() || split.test_conversations.is_empty() {
                return Err(Error::Config(format!(
                    "by-conversation split impossible: {} train / {} test conversations",
                    split.train_conversations.len(),
                    split.test_conversations.len()
                )));
            }
            for (row, conv) in row_conversations.iter().enumerate() {
                if split.train_conversations.contains(conv) {
                    split.train.push(row);
                } else if split.test_conversations.contains(conv) {
                    split.test.push(row);
                } else {
                    split.excluded.push(row);
                }
            }
            Ok(split)
        }
    }
}
