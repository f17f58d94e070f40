use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{Conversation, Corpus, WordToken};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};

/// Parameters of the synthetic transcript generator.
///
/// Each speaker owns a private vocabulary whose vectors sit around a
/// per-speaker unit-norm centroid, and speaks at its own rate. Turns
/// alternate between the conversation's participants and are separated by
/// `pause_at_turn` seconds; words inside a turn are separated by a gap drawn
/// from `intra_turn_gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_conversations: usize,
    pub n_speakers: usize,
    pub embedding_dim: usize,
    pub words_per_turn_mean: f64,
    pub turn_count_mean: f64,
    /// Expected distance of a word vector from its speaker centroid.
    pub speaker_topic_spread: f64,
    pub pause_at_turn: f64,
    /// Characters per second, drawn uniformly per speaker.
    pub speech_rate_range: (f64, f64),
    pub seed: u64,
    /// Distinct speakers taking part in each conversation.
    pub speakers_per_conversation: usize,
    pub vocab_per_speaker: usize,
    /// Size of a vocabulary shared by all speakers, with speaker-neutral vectors.
    pub shared_vocab_size: usize,
    /// Probability that a word is drawn from the shared vocabulary.
    pub shared_word_prob: f64,
    /// Range of the silence between consecutive words of one turn.
    pub intra_turn_gap: (f64, f64),
    /// Relative jitter applied to each word's duration.
    pub duration_jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_conversations: 100,
            n_speakers: 8,
            embedding_dim: 32,
            words_per_turn_mean: 12.0,
            turn_count_mean: 16.0,
            speaker_topic_spread: 0.0,
            pause_at_turn: 0.6,
            speech_rate_range: (8.0, 16.0),
            seed: 0,
            speakers_per_conversation: 2,
            vocab_per_speaker: 200,
            shared_vocab_size: 0,
            shared_word_prob: 0.0,
            intra_turn_gap: (0.02, 0.15),
            duration_jitter: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_conversations < 1
            || self.n_speakers < 1
            || self.embedding_dim < 1
            || self.vocab_per_speaker < 1
            || self.speakers_per_conversation < 1
        {
            return bad("all counts must be at least 1");
        }
        if !(self.words_per_turn_mean >= 1.0) || !(self.turn_count_mean >= 1.0) {
            return bad("words_per_turn_mean and turn_count_mean must be at least 1");
        }
        let (lo, hi) = self.speech_rate_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("speech_rate_range must satisfy 0 < min <= max");
        }
        if !(self.speaker_topic_spread >= 0.0) || !(self.pause_at_turn >= 0.0) {
            return bad("speaker_topic_spread and pause_at_turn must be non-negative");
        }
        let (glo, ghi) = self.intra_turn_gap;
        if !(glo >= 0.0 && glo <= ghi && ghi.is_finite()) {
            return bad("intra_turn_gap must satisfy 0 <= min <= max");
        }
        if !(0.0..1.0).contains(&self.duration_jitter) {
            return bad("duration_jitter must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.shared_word_prob) {
            return bad("shared_word_prob must be in [0, 1]");
        }
        if self.shared_word_prob > 0.0 && self.shared_vocab_size == 0 {
            return bad("shared_word_prob > 0 needs a shared vocabulary");
        }
        if self.speakers_per_conversation > self.n_speakers {
            return bad("speakers_per_conversation exceeds n_speakers");
        }
        if self.turn_count_mean > 1.0 {
            if self.n_speakers < 2 {
                return bad("multi-turn conversations need at least 2 speakers");
            }
            if self.speakers_per_conversation < 2 {
                return bad("multi-turn conversations need at least 2 speakers per conversation");
            }
        }
        Ok(())
    }
}

struct Speaker {
    id: String,
    rate: f64,
    vocab: Vec<String>,
}

/// Generates a corpus and an embedding table covering every generated word.
/// Output depends only on `config` (including its seed).
pub fn generate_synthetic(config: &SynthConfig) -> Result<(Corpus, EmbeddingTable)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.embedding_dim;
    let mut table = EmbeddingTable::new(dim)?;
    let mut used = HashSet::new();
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise_std = config.speaker_topic_spread / (dim as f64).sqrt();

    let mut speakers = Vec::with_capacity(config.n_speakers);
    for s in 0..config.n_speakers {
        let mut centroid: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
        let norm = centroid.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        centroid.iter_mut().for_each(|x| *x /= norm);

        let (lo, hi) = config.speech_rate_range;
        let rate = if hi > lo { rng.random_range(lo..=hi) } else { lo };

        let mut vocab = Vec::with_capacity(config.vocab_per_speaker);
        for _ in 0..config.vocab_per_speaker {
            let word = fresh_word(&mut rng, &mut used);
            let v: Vec<f64> = centroid
                .iter()
                .map(|c| c + noise_std * unit.sample(&mut rng))
                .collect();
            table.insert(word.clone(), v)?;
            vocab.push(word);
        }
        speakers.push(Speaker {
            id: format!("spk_{s:03}"),
            rate,
            vocab,
        });
    }

    let shared_std = 1.0 / (dim as f64).sqrt();
    let mut shared = Vec::with_capacity(config.shared_vocab_size);
    for _ in 0..config.shared_vocab_size {
        let word = fresh_word(&mut rng, &mut used);
        let v: Vec<f64> = (0..dim).map(|_| shared_std * unit.sample(&mut rng)).collect();
        table.insert(word.clone(), v)?;
        shared.push(word);
    }

    let extra_turns = poisson(config.turn_count_mean - 1.0);
    let extra_words = poisson(config.words_per_turn_mean - 1.0);

    let mut conversations = Vec::with_capacity(config.n_conversations);
    for c in 0..config.n_conversations {
        let participants: Vec<usize> =
            index::sample(&mut rng, config.n_speakers, config.speakers_per_conversation).into_vec();
        let n_turns = 1 + draw(&extra_turns, &mut rng);

        let mut tokens = Vec::new();
        let mut t = 0.0f64;
        let mut current = participants[rng.random_range(0..participants.len())];
        for turn in 0..n_turns {
            if turn > 0 {
                let others: Vec<usize> =
                    participants.iter().copied().filter(|&p| p != current).collect();
                current = others[rng.random_range(0..others.len())];
                t += config.pause_at_turn;
            }
            let spk = &speakers[current];
            let n_words = 1 + draw(&extra_words, &mut rng);
            for w in 0..n_words {
                if w > 0 {
                    let (glo, ghi) = config.intra_turn_gap;
                    t += if ghi > glo { rng.random_range(glo..ghi) } else { glo };
                }
                let text = if !shared.is_empty() && rng.random_bool(config.shared_word_prob) {
                    &shared[rng.random_range(0..shared.len())]
                } else {
                    &spk.vocab[rng.random_range(0..spk.vocab.len())]
                };
                let chars = text.chars().count() as f64;
                let jitter = if config.duration_jitter > 0.0 {
                    1.0 + rng.random_range(-config.duration_jitter..config.duration_jitter)
                } else {
                    1.0
                };
                let start = round_ms(t);
                let end = round_ms(t + chars / spk.rate * jitter).max(start);
                tokens.push(WordToken::new(text.clone(), spk.id.clone(), start, end));
                t = end;
            }
        }
        conversations.push(Conversation::new(format!("conv_{c:04}"), tokens));
    }

    Ok((Corpus::new(conversations)?, table))
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean"))
}

fn draw(dist: &Option<Poisson<f64>>, rng: &mut ChaCha8Rng) -> usize {
    dist.as_ref().map_or(0, |d| d.sample(rng) as usize)
}

fn round_ms(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn fresh_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    loop {
        let len = rng.random_range(2..=9);
        let w: String = (0..len)
            .map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char)
            .collect();
        if used.insert(w.clone()) {
            return w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::csv_io::serialize_conversation;
    use crate::features::windows;
    use crate::Label;

    fn small() -> SynthConfig {
        SynthConfig {
            n_conversations: 5,
            n_speakers: 3,
            embedding_dim: 4,
            words_per_turn_mean: 5.0,
            turn_count_mean: 4.0,
            seed: 11,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (a, ta) = generate_synthetic(&small()).unwrap();
        let (b, tb) = generate_synthetic(&small()).unwrap();
        let bytes = |c: &Corpus| {
            c.conversations()
                .iter()
                .flat_map(serialize_conversation)
                .collect::<Vec<u8>>()
        };
        assert_eq!(bytes(&a), bytes(&b));
        assert_eq!(ta.to_vec_bytes(), tb.to_vec_bytes());
    }

    #[test]
    fn single_turn_has_one_speaker_and_no_splits() {
        let cfg = SynthConfig {
            turn_count_mean: 1.0,
            ..small()
        };
        let (corpus, _) = generate_synthetic(&cfg).unwrap();
        for c in corpus.conversations() {
            assert_eq!(c.speakers().len(), 1);
            assert!(windows(c).iter().all(|w| w.label == Label::Same));
        }
    }

    #[test]
    fn zero_spread_speaker_shares_one_vector() {
        let cfg = SynthConfig {
            n_speakers: 2,
            speaker_topic_spread: 0.0,
            ..small()
        };
        let (corpus, table) = generate_synthetic(&cfg).unwrap();
        for spk in ["spk_000", "spk_001"] {
            let vecs: Vec<Vec<f64>> = corpus
                .conversations()
                .iter()
                .flat_map(|c| c.tokens.iter())
                .filter(|t| t.speaker == spk)
                .map(|t| table.lookup(&t.text).vector)
                .collect();
            assert!(!vecs.is_empty());
            assert!(vecs.iter().all(|v| v == &vecs[0]));
        }
    }

    #[test]
    fn structural_properties() {
        let (corpus, table) = generate_synthetic(&small()).unwrap();
        assert_eq!(corpus.len(), 5);
        for c in corpus.conversations() {
            assert!(c.validate().is_empty());
            for p in c.tokens.windows(2) {
                if p[0].speaker != p[1].speaker {
                    assert!((p[1].start - p[0].end - 0.6).abs() < 2e-3);
                }
            }
            for t in &c.tokens {
                assert!(table.contains(&t.text));
            }
        }
    }

    #[test]
    fn single_speaker_multi_turn_rejected() {
        let cfg = SynthConfig {
            n_speakers: 1,
            speakers_per_conversation: 1,
            ..small()
        };
        assert!(matches!(generate_synthetic(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn bad_rate_range_rejected() {
        let cfg = SynthConfig {
            speech_rate_range: (5.0, 2.0),
            ..small()
        };
        assert!(generate_synthetic(&cfg).is_err());
    }
}
