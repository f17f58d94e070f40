//! Sliding windows over a conversation and their feature encoding.
//!
//! A window of `w` consecutive words (6 by default) is encoded as
//!
//! ```text
//! [ mean embedding of the first half | mean embedding of the second half
//!   | duration of each word | speech rate of each word | gap at the midpoint ]
//! ```
//!
//! giving `2 * dim + 2 * w + 1` values: 613 for 300-dimensional vectors and
//! six-word windows. The window is labeled `Split` when the speakers of the
//! two middle words differ.

mod cache;
mod scaler;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Conversation, Corpus, WordToken};
use crate::embeddings::{average, EmbeddingTable};
use crate::error::{Error, Result};
use crate::label::Label;

pub use cache::{read_cache, sidecar_path, write_cache, CacheMeta, CACHE_FORMAT_VERSION};
pub use scaler::Scaler;

pub const WINDOW_SIZE: usize = 6;

/// Durations below this many seconds are raised to it before computing rates.
pub const MIN_DURATION: f64 = 1e-3;

/// Encoding parameters. The default is the six-word window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodeConfig {
    pub window_size: usize,
    pub min_duration: f64,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            window_size: WINDOW_SIZE,
            min_duration: MIN_DURATION,
        }
    }
}

impl EncodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 2 || !self.window_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "window size {} must be even and at least 2",
                self.window_size
            )));
        }
        if !(self.min_duration > 0.0) {
            return Err(Error::Config("minimum duration must be positive".into()));
        }
        Ok(())
    }

    pub fn feature_len(&self, embedding_dim: usize) -> usize {
        feature_len(embedding_dim, self.window_size)
    }
}

/// `2 * dim + 2 * window + 1`.
pub fn feature_len(embedding_dim: usize, window_size: usize) -> usize {
    2 * embedding_dim + 2 * window_size + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub conversation_id: String,
    /// 1-based position of the first word in the conversation.
    pub index: usize,
    pub tokens: Vec<WordToken>,
    pub label: Label,
}

/// Label rule shared by windowing and segmentation.
pub fn window_label(tokens: &[WordToken]) -> Label {
    let mid = tokens.len() / 2;
    if tokens[mid - 1].speaker != tokens[mid].speaker {
        Label::Split
    } else {
        Label::Same
    }
}

/// Six-word windows with stride one: `max(0, n - 5)` of them.
pub fn windows(conversation: &Conversation) -> Vec<Window> {
    windows_sized(conversation, WINDOW_SIZE)
}

pub fn windows_sized(conversation: &Conversation, size: usize) -> Vec<Window> {
    if conversation.len() < size {
        warn!(
            "conversation {} has {} tokens, fewer than {size}; no windows",
            conversation.id,
            conversation.len()
        );
        return Vec::new();
    }
    conversation
        .tokens
        .windows(size)
        .enumerate()
        .map(|(i, toks)| Window {
            conversation_id: conversation.id.clone(),
            index: i + 1,
            tokens: toks.to_vec(),
            label: window_label(toks),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

/// Encodes a six-word window.
pub fn encode(window: &Window, table: &EmbeddingTable) -> FeatureVector {
    encode_tokens(&window.tokens, table, MIN_DURATION, window.label)
}

/// Encodes any even-length run of tokens.
pub fn encode_tokens(
    tokens: &[WordToken],
    table: &EmbeddingTable,
    min_duration: f64,
    label: Label,
) -> FeatureVector {
    let w = tokens.len();
    let half = w / 2;
    let dim = table.dim();
    let mut values = Vec::with_capacity(feature_len(dim, w));

    let vectors: Vec<Vec<f64>> = tokens.iter().map(|t| table.lookup(&t.text).vector).collect();
    values.extend(average(&vectors[..half]).expect("non-empty half"));
    values.extend(average(&vectors[half..]).expect("non-empty half"));

    for t in tokens {
        values.push(t.duration().max(0.0));
    }
    for t in tokens {
        let chars = t.text.chars().count() as f64;
        values.push(chars / t.duration().max(min_duration));
    }
    values.push((tokens[half].start - tokens[half - 1].end).max(0.0));

    FeatureVector { values, label }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub same: usize,
    pub split: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.same + self.split
    }

    pub fn split_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.split as f64 / self.total() as f64
        }
    }

    pub fn of(labels: &[Label]) -> Self {
        let split = labels.iter().filter(|l| l.is_split()).count();
        ClassCounts {
            same: labels.len() - split,
            split,
        }
    }
}

/// Row-major feature matrix with labels and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    embedding_dim: usize,
    window_size: usize,
    values: Vec<f64>,
    labels: Vec<Label>,
    /// (conversation id, 1-based window index) per row.
    provenance: Vec<(String, usize)>,
}

impl Dataset {
    pub fn empty(embedding_dim: usize, window_size: usize) -> Self {
        Dataset {
            embedding_dim,
            window_size,
            values: Vec::new(),
            labels: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Builds a dataset from raw rows. Each row must have
    /// `2 * embedding_dim + 2 * window_size + 1` values.
    pub fn from_rows(
        embedding_dim: usize,
        window_size: usize,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        provenance: Vec<(String, usize)>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != provenance.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len().min(provenance.len()),
            });
        }
        let width = feature_len(embedding_dim, window_size);
        let mut values = Vec::with_capacity(rows.len() * width);
        for r in &rows {
            if r.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Dataset {
            embedding_dim,
            window_size,
            values,
            labels,
            provenance,
        })
    }

    pub fn push(&mut self, fv: FeatureVector, conversation_id: String, index: usize) {
        assert_eq!(fv.values.len(), self.width(), "feature length");
        self.values.extend(fv.values);
        self.labels.push(fv.label);
        self.provenance.push((conversation_id, index));
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    /// Feature count per row.
    pub fn width(&self) -> usize {
        feature_len(self.embedding_dim, self.window_size)
    }

    /// First column of the timing block.
    pub fn timing_offset(&self) -> usize {
        2 * self.embedding_dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.width().max(1)).take(self.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn provenance(&self) -> &[(String, usize)] {
        &self.provenance
    }

    pub fn row_conversations(&self) -> Vec<String> {
        self.provenance.iter().map(|(c, _)| c.clone()).collect()
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::of(&self.labels)
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let w = self.width();
        let mut values = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        let mut provenance = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            provenance.push(self.provenance[i].clone());
        }
        Dataset {
            embedding_dim: self.embedding_dim,
            window_size: self.window_size,
            values,
            labels,
            provenance,
        }
    }
}

/// Encodes every window of every conversation with six-word windows.
pub fn encode_corpus(corpus: &Corpus, table: &EmbeddingTable) -> Dataset {
    encode_corpus_with(corpus, table, &EncodeConfig::default())
}

/// Rows are ordered by conversation id, then window index, whatever the
/// order of `corpus`. Conversations are encoded in parallel.
pub fn encode_corpus_with(corpus: &Corpus, table: &EmbeddingTable, cfg: &EncodeConfig) -> Dataset {
    let sorted = corpus.sorted();
    let per_conv: Vec<Vec<(FeatureVector, usize)>> = sorted
        .par_iter()
        .map(|c| {
            windows_sized(c, cfg.window_size)
                .into_iter()
                .map(|w| {
                    let fv = encode_tokens(&w.tokens, table, cfg.min_duration, w.label);
                    (fv, w.index)
                })
                .collect()
        })
        .collect();
    let mut ds = Dataset::empty(table.dim(), cfg.window_size);
    for (c, rows) in sorted.iter().zip(per_conv) {
        for (fv, index) in rows {
            ds.push(fv, c.id.clone(), index);
        }
    }
    ds
}
