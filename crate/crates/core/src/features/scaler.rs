use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Z-scores the timing block of each row; embedding columns pass through.
///
/// Statistics are population mean and standard deviation over the rows the
/// scaler was fitted on. A column with zero variance gets std 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    /// Column of the first scaled feature.
    pub offset: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::Empty("cannot fit scaler on an empty dataset"));
        }
        let offset = dataset.timing_offset();
        let width = dataset.width() - offset;
        let n = dataset.len() as f64;
        let mut mean = vec![0.0; width];
        for row in dataset.rows() {
            mean.iter_mut().zip(&row[offset..]).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for row in dataset.rows() {
            for ((v, x), m) in var.iter_mut().zip(&row[offset..]).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(v, m): (&f64, &f64)| {
                let s = (v / n).sqrt();
                if s > 1e-12 * m.abs().max(1.0) {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Scaler { offset, mean, std })
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((x, m), s) in row[self.offset..].iter_mut().zip(&self.mean).zip(&self.std) {
            *x = (*x - m) / s;
        }
    }

    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.width() != self.offset + self.mean.len() {
            return Err(Error::Dimension {
                expected: self.offset + self.mean.len(),
                got: dataset.width(),
            });
        }
        let mut out = dataset.clone();
        let w = out.width();
        for row in out.values_mut().chunks_exact_mut(w) {
            self.apply_row(row);
        }
        Ok(out)
    }
}
