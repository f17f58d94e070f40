//! Encoded dataset cache: a CSV matrix (`f0 .. f{n-1}, label`, label
//! 0 = Same, 1 = Split) plus a JSON sidecar at `<path>.meta.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassCounts, Dataset};
use crate::error::{Error, Result};
use crate::label::Label;

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheMeta {
    pub format_version: u32,
    pub embedding_dim: usize,
    pub window_size: usize,
    pub feature_len: usize,
    pub min_duration: f64,
    pub clamp_rules: Vec<String>,
    pub scaled: bool,
    pub corpus_hash: String,
    pub rows: usize,
    pub class_counts: ClassCounts,
    pub lookups: u64,
    pub oov: u64,
    pub oov_rate: f64,
    /// (conversation id, 1-based window index) per row.
    pub provenance: Vec<(String, usize)>,
    pub conversation_speakers: BTreeMap<String, BTreeSet<String>>,
}

impl CacheMeta {
    pub fn clamp_rules(min_duration: f64) -> Vec<String> {
        vec![
            "gap = max(0, start(w[mid]) - end(w[mid-1]))".into(),
            format!("rate = chars / max(duration, {min_duration})"),
            "duration = max(0, end - start)".into(),
        ]
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_cache(dataset: &Dataset, meta: &CacheMeta, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    let width = dataset.width();
    let mut header: Vec<String> = (0..width).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(width + 1);
    for (row, label) in dataset.rows().zip(dataset.labels()) {
        record.clear();
        record.extend(row.iter().map(f64::to_string));
        record.push(label.index().to_string());
        w.write_record(&record)?;
    }
    w.flush()?;

    let side = sidecar_path(path);
    let file = File::create(&side).map_err(|e| Error::file(&side, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), meta)?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<(Dataset, CacheMeta)> {
    let side = sidecar_path(path);
    let file = File::open(&side).map_err(|e| Error::file(&side, e))?;
    let meta: CacheMeta = serde_json::from_reader(BufReader::new(file))?;
    if meta.format_version != CACHE_FORMAT_VERSION {
        return Err(Error::Config(format!(
            "dataset cache format {} unsupported (expected {CACHE_FORMAT_VERSION})",
            meta.format_version
        )));
    }

    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut r = csv::ReaderBuilder::new().from_reader(BufReader::new(file));
    let width = meta.feature_len;
    if r.headers()?.len() != width + 1 {
        return Err(Error::Dimension {
            expected: width + 1,
            got: r.headers()?.len(),
        });
    }
    let mut rows = Vec::with_capacity(meta.rows);
    let mut labels = Vec::with_capacity(meta.rows);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row_no = i + 2;
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                row: row_no,
                msg: format!("bad value {s:?}"),
            })
        };
        let row: Vec<f64> = rec.iter().take(width).map(parse).collect::<Result<_>>()?;
        let label = match &rec[width] {
            "0" => Label::Same,
            "1" => Label::Split,
            other => {
                return Err(Error::Parse {
                    row: row_no,
                    msg: format!("bad label {other:?}"),
                })
            }
        };
        rows.push(row);
        labels.push(label);
    }
    if rows.len() != meta.provenance.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: meta.provenance.len(),
        });
    }
    let ds = Dataset::from_rows(
        meta.embedding_dim,
        meta.window_size,
        rows,
        labels,
        meta.provenance.clone(),
    )?;
    Ok((ds, meta))
}
