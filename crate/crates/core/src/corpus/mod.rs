//! Word-level transcripts: parsing, validation, synthesis and splitting.

mod csv_io;
mod split;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use csv_io::{load_dir, parse_conversation, parse_conversation_with, write_dir, ParseOptions};
pub use split::{split_corpus, split_rows, RowSplit, SplitMode};
pub use synth::{generate_synthetic, SynthConfig};

/// One transcribed word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    pub text: String,
    /// Opaque speaker identifier; empty when the transcript carries no speaker column.
    pub speaker: String,
    pub start: f64,
    pub end: f64,
}

impl WordToken {
    pub fn new(text: impl Into<String>, speaker: impl Into<String>, start: f64, end: f64) -> Self {
        WordToken {
            text: text.into(),
            speaker: speaker.into(),
            start,
            end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// A single transcript, tokens in timeline order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub tokens: Vec<WordToken>,
}

/// A problem found by [`Conversation::validate`]. Rows are 1-based data rows
/// counted the way the CSV loader counts them (the header is row 1).
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    EndBeforeStart { row: usize },
    NegativeStart { row: usize },
    StartsOutOfOrder { row: usize },
}

impl Conversation {
    pub fn new(id: impl Into<String>, tokens: Vec<WordToken>) -> Self {
        Conversation {
            id: id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Distinct speakers appearing in the conversation.
    pub fn speakers(&self) -> BTreeSet<String> {
        self.tokens.iter().map(|t| t.speaker.clone()).collect()
    }

    /// Number of adjacent token pairs whose speakers differ.
    pub fn speaker_turns(&self) -> usize {
        self.tokens
            .windows(2)
            .filter(|p| p[0].speaker != p[1].speaker)
            .count()
    }

    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let mut prev_start = f64::NEG_INFINITY;
        for (i, t) in self.tokens.iter().enumerate() {
            let row = i + 2;
            if t.start < 0.0 {
                issues.push(Issue::NegativeStart { row });
            }
            if t.end < t.start {
                issues.push(Issue::EndBeforeStart { row });
            }
            if t.start < prev_start {
                issues.push(Issue::StartsOutOfOrder { row });
            }
            prev_start = t.start;
        }
        issues
    }
}

/// A collection of conversations with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    conversations: Vec<Conversation>,
}

impl Corpus {
    pub fn new(conversations: Vec<Conversation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &conversations {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::Config(format!("duplicate conversation id {:?}", c.id)));
            }
        }
        Ok(Corpus { conversations })
    }

    pub fn conversations(&self) -> &[Conversation] {
        &self.conversations
    }

    pub fn len(&self) -> usize {
        self.conversations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conversations.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.conversations.iter().map(Conversation::len).sum()
    }

    pub fn get(&self, id: &str) -> Option<&Conversation> {
        self.conversations.iter().find(|c| c.id == id)
    }

    /// Conversations ordered by id, the canonical order for encoding and hashing.
    pub fn sorted(&self) -> Vec<&Conversation> {
        let mut v: Vec<&Conversation> = self.conversations.iter().collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn speakers_by_conversation(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.conversations
            .iter()
            .map(|c| (c.id.clone(), c.speakers()))
            .collect()
    }

    pub fn subset(&self, ids: &BTreeSet<String>) -> Corpus {
        Corpus {
            conversations: self
                .conversations
                .iter()
                .filter(|c| ids.contains(&c.id))
                .cloned()
                .collect(),
        }
    }

    /// SHA-256 over the canonical CSV rendering of every conversation, in id order.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for c in self.sorted() {
            hasher.update(c.id.as_bytes());
            hasher.update([0u8]);
            hasher.update(csv_io::serialize_conversation(c));
            hasher.update([0u8]);
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_ids_rejected() {
        let a = Conversation::new("x", vec![]);
        let b = Conversation::new("x", vec![]);
        assert!(matches!(Corpus::new(vec![a, b]), Err(Error::Config(_))));
    }

    #[test]
    fn validate_flags_each_violation() {
        let c = Conversation::new(
            "c",
            vec![
                WordToken::new("a", "A", 1.0, 1.2),
                WordToken::new("b", "A", 0.5, 0.4),
                WordToken::new("c", "A", -1.0, 0.0),
            ],
        );
        let issues = c.validate();
        assert!(issues.contains(&Issue::StartsOutOfOrder { row: 3 }));
        assert!(issues.contains(&Issue::EndBeforeStart { row: 3 }));
        assert!(issues.contains(&Issue::NegativeStart { row: 4 }));
    }

    #[test]
    fn hash_ignores_conversation_order() {
        let a = Conversation::new("a", vec![WordToken::new("x", "A", 0.0, 1.0)]);
        let b = Conversation::new("b", vec![WordToken::new("y", "B", 0.0, 1.0)]);
        let c1 = Corpus::new(vec![a.clone(), b.clone()]).unwrap();
        let c2 = Corpus::new(vec![b, a]).unwrap();
        assert_eq!(c1.content_hash(), c2.content_hash());
    }
}
