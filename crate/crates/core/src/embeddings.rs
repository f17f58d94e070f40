//! Pre-trained word-vector tables in the fastText/word2vec text format.
//!
//! ```text
//! <count> <dim>
//! <token> <v1> ... <v_dim>
//! ```
//!
//! Lookups are exact matches on the raw token string. Misses return the
//! zero vector and are counted, so the out-of-vocabulary rate of a run can
//! be reported.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LookupResult {
    pub vector: Vec<f64>,
    pub oov: bool,
}

/// Snapshot of the lookup counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LookupStats {
    pub lookups: u64,
    pub misses: u64,
}

impl LookupStats {
    pub fn hits(&self) -> u64 {
        self.lookups - self.misses
    }

    pub fn oov_rate(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.misses as f64 / self.lookups as f64
        }
    }
}

#[derive(Debug)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    // insertion order, for stable serialization
    order: Vec<String>,
    declared_count: usize,
    lookups: AtomicU64,
    misses: AtomicU64,
}

impl Clone for EmbeddingTable {
    fn clone(&self) -> Self {
        EmbeddingTable {
            dim: self.dim,
            entries: self.entries.clone(),
            order: self.order.clone(),
            declared_count: self.declared_count,
            lookups: AtomicU64::new(self.lookups.load(Ordering::Relaxed)),
            misses: AtomicU64::new(self.misses.load(Ordering::Relaxed)),
        }
    }
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        Ok(EmbeddingTable {
            dim,
            entries: HashMap::new(),
            order: Vec::new(),
            declared_count: 0,
            lookups: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    /// Adds an entry. Returns `false` (and keeps the existing vector) when the
    /// token is already present.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vector.len(),
            });
        }
        let token = token.into();
        if self.entries.contains_key(&token) {
            return Ok(false);
        }
        self.order.push(token.clone());
        self.entries.insert(token, vector);
        self.declared_count = self.order.len();
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry count announced by the file header.
    pub fn declared_count(&self) -> usize {
        self.declared_count
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Exact-match lookup. A miss yields the zero vector with `oov` set.
    pub fn lookup(&self, token: &str) -> LookupResult {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        match self.entries.get(token) {
            Some(v) => LookupResult {
                vector: v.clone(),
                oov: false,
            },
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                LookupResult {
                    vector: vec![0.0; self.dim],
                    oov: true,
                }
            }
        }
    }

    pub fn stats(&self) -> LookupStats {
        LookupStats {
            lookups: self.lookups.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    pub fn reset_stats(&self) {
        self.lookups.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    /// Parses the text format. Duplicate tokens keep their first vector; a
    /// header count that disagrees with the body only logs a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            row: 1,
            msg: "missing `<count> <dim>` header".into(),
        })?;
        let mut parts = header.split_whitespace();
        let mut header_field = |name: &str| -> Result<usize> {
            parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| Error::Parse {
                row: 1,
                msg: format!("malformed header {header:?}: bad {name}"),
            })
        };
        let declared = header_field("count")?;
        let dim = header_field("dim")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                row: 1,
                msg: format!("malformed header {header:?}"),
            });
        }
        let mut table = EmbeddingTable::new(dim).map_err(|_| Error::Parse {
            row: 1,
            msg: "dimension must be at least 1".into(),
        })?;

        for (i, line) in lines {
            let row = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line");
            let values: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        row,
                        msg: format!("value {f:?} is not a number"),
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != dim {
                return Err(Error::Parse {
                    row,
                    msg: format!("expected {dim} values, found {}", values.len()),
                });
            }
            if !table.insert(token, values)? {
                warn!("embedding line {row}: duplicate token {token:?} ignored");
            }
        }
        if table.len() != declared {
            warn!(
                "embedding header declares {declared} entries but {} were read",
                table.len()
            );
        }
        table.declared_count = declared;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text)
    }

    /// Renders the table in the text format, entries in insertion order.
    pub fn to_vec_bytes(&self) -> Vec<u8> {
        let mut out = format!("{} {}\n", self.order.len(), self.dim);
        for token in &self.order {
            out.push_str(token);
            for v in &self.entries[token] {
                write!(out, " {v}").expect("string write");
            }
            out.push('\n');
        }
        out.into_bytes()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_vec_bytes()).map_err(|e| Error::file(path, e))
    }
}

/// Componentwise mean of equal-length vectors.
pub fn average<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::Empty("average of no vectors"))?;
    let dim = first.as_ref().len();
    let mut acc = vec![0.0; dim];
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: v.len(),
            });
        }
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    let n = vectors.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}
