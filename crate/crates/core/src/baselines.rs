//! Reference classifiers: exact k-nearest-neighbours and the constant
//! majority-class predictor.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::Scorer;
use crate::features::{ClassCounts, Dataset, Scaler};
use crate::label::Label;

/// Brute-force Euclidean k-NN over stored rows.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    dim: usize,
    rows: Vec<f64>,
    labels: Vec<Label>,
    k: usize,
    scaler: Option<Scaler>,
}

impl KnnIndex {
    /// `rows` is row-major with `dim` columns. `k` must be odd and no larger
    /// than the number of rows.
    pub fn new(dim: usize, rows: Vec<f64>, labels: Vec<Label>, k: usize) -> Result<Self> {
        if dim == 0 || rows.len() != dim * labels.len() {
            return Err(Error::Dimension {
                expected: dim * labels.len(),
                got: rows.len(),
            });
        }
        if k == 0 || k.is_multiple_of(2) || k > labels.len() {
            return Err(Error::Config(format!(
                "k = {k} must be odd and between 1 and {}",
                labels.len()
            )));
        }
        Ok(KnnIndex {
            dim,
            rows,
            labels,
            k,
            scaler: None,
        })
    }

    /// Index over raw dataset rows. With a scaler, stored rows and queries
    /// are both scaled.
    pub fn from_dataset(train: &Dataset, k: usize, scaler: Option<Scaler>) -> Result<Self> {
        let rows = match &scaler {
            Some(s) => s.apply(train)?.values().to_vec(),
            None => train.values().to_vec(),
        };
        let mut idx = KnnIndex::new(train.width(), rows, train.labels().to_vec(), k)?;
        idx.scaler = scaler;
        Ok(idx)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        let mut other = self.clone();
        if k == 0 || k.is_multiple_of(2) || k > self.len() {
            return Err(Error::Config(format!("k = {k} must be odd and between 1 and {}", self.len())));
        }
        other.k = k;
        Ok(other)
    }

    /// Indices of the `k` stored rows closest to `query` (already in the
    /// index's feature space), nearest first; equal distances favour the
    /// lower row index.
    pub fn neighbors(&self, query: &[f64], k: usize) -> Result<Vec<usize>> {
        if query.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: query.len(),
            });
        }
        let k = k.min(self.len());
        let mut d: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, r)| {
                let s: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    fn vote(&self, neighbors: &[usize]) -> (Label, f64) {
        let split = neighbors.iter().filter(|&&i| self.labels[i].is_split()).count();
        let frac = split as f64 / neighbors.len() as f64;
        let label = if 2 * split > neighbors.len() {
            Label::Split
        } else {
            Label::Same
        };
        (label, frac)
    }

    /// Majority label among the `k` nearest rows.
    pub fn classify(&self, query: &[f64]) -> Result<Label> {
        Ok(self.vote(&self.neighbors(query, self.k)?).0)
    }

    /// Split fraction of the neighbourhood for each `k` in `ks`, for every
    /// raw row of `data`. One neighbour search per row serves all `ks`.
    pub fn split_fractions(&self, data: &Dataset, ks: &[usize]) -> Result<Vec<Vec<f64>>> {
        if data.width() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: data.width(),
            });
        }
        let kmax = ks.iter().copied().max().unwrap_or(self.k);
        let per_row: Vec<Vec<f64>> = (0..data.len())
            .into_par_iter()
            .map(|i| {
                let mut q = data.row(i).to_vec();
                if let Some(s) = &self.scaler {
                    s.apply_row(&mut q);
                }
                let nn = self.neighbors(&q, kmax).expect("dimension checked");
                ks.iter().map(|&k| self.vote(&nn[..k.min(nn.len())]).1).collect()
            })
            .collect();
        Ok((0..ks.len())
            .map(|j| per_row.iter().map(|r| r[j]).collect())
            .collect())
    }
}

impl Scorer for KnnIndex {
    fn name(&self) -> String {
        format!("knn-{}", self.k)
    }

    /// Split fraction among the k neighbours; above 0.5 exactly when the
    /// majority vote is Split.
    fn scores(&self, features: &Dataset) -> Result<Vec<f64>> {
        Ok(self.split_fractions(features, &[self.k])?.remove(0))
    }
}

/// Predicts the more frequent training label for every query; a tie goes
/// to `Same`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorityClassifier {
    pub label: Label,
}

pub fn majority_classify(counts: ClassCounts) -> MajorityClassifier {
    MajorityClassifier {
        label: if counts.split > counts.same {
            Label::Split
        } else {
            Label::Same
        },
    }
}

impl Scorer for MajorityClassifier {
    fn name(&self) -> String {
        "majority".into()
    }

    fn scores(&self, features: &Dataset) -> Result<Vec<f64>> {
        let s = if self.label.is_split() { 1.0 } else { 0.0 };
        Ok(vec![s; features.len()])
    }
}
