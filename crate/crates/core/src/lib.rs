//! Speaker change point detection over word-level transcripts.
//!
//! A conversation is cut into overlapping six-word windows. Each window is
//! encoded as the averaged word embeddings of its two halves plus per-word
//! timing features, and a small fully-connected network decides whether the
//! speaker changes between the third and fourth word.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: transcript parsing, synthetic corpora, train/test splits
//! - [`embeddings`]: `.vec` word-vector tables and averaging
//! - [`features`]: sliding windows, feature encoding, scaling, dataset cache
//! - [`nn`]: the classifier (forward, backprop, Adam, persistence)
//! - [`baselines`]: k-NN and majority-class reference classifiers
//! - [`eval`]: confusion/PRF, ROC/AUC, diarization error conversion, reports

pub mod baselines;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod label;
pub mod nn;
pub mod pipeline;

pub use error::{Error, Result};
pub use label::Label;
