//! Model files.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "TXCPDMDL"
//! 8       4     u32 format version
//! 12      8     u64 header length H
//! 20      H     UTF-8 JSON header: architecture, scaler, meta, shapes
//! 20+H    8*P   f64 parameters, per layer: weights (outputs x inputs,
//!               row-major) then bias
//! end-32  32    SHA-256 of every preceding byte
//! ```
//!
//! The JSON variant is a single object
//! `{"format": "textcpd-model", "format_version": 1, "model": {...}}` and is
//! chosen by a `.json` extension.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::model::{Layer, Model, TrainingMeta};
use super::Architecture;
use crate::error::{Error, Result};
use crate::features::Scaler;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"TXCPDMDL";
const JSON_FORMAT: &str = "textcpd-model";

#[derive(Serialize, Deserialize)]
struct Header {
    architecture: Architecture,
    scaler: Option<Scaler>,
    meta: TrainingMeta,
    /// (outputs, inputs) per layer.
    shapes: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct JsonModel {
    format: String,
    format_version: u32,
    model: Model,
}

pub fn model_to_bytes(model: &Model) -> Result<Vec<u8>> {
    let header = Header {
        architecture: model.architecture.clone(),
        scaler: model.scaler.clone(),
        meta: model.meta.clone(),
        shapes: model.layers.iter().map(|l| (l.outputs, l.inputs)).collect(),
    };
    let header = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(20 + header.len() + 8 * model.parameter_count() + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    Ok(out)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<Model> {
    let corrupt = |m: &str| Error::CorruptModel(m.to_string());
    if bytes.len() < 20 + 32 || &bytes[..8] != MAGIC {
        return Err(corrupt("missing magic or file too short"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(corrupt("checksum mismatch (truncated or modified)"));
    }
    let header_len = u64::from_le_bytes(body[12..20].try_into().unwrap()) as usize;
    let header_end = 20usize
        .checked_add(header_len)
        .filter(|&e| e <= body.len())
        .ok_or_else(|| corrupt("header length exceeds file"))?;
    let header: Header = serde_json::from_slice(&body[20..header_end])
        .map_err(|e| Error::CorruptModel(format!("header: {e}")))?;
    header.architecture.validate()?;

    let expected_shapes: Vec<(usize, usize)> =
        header.architecture.layer_dims.windows(2).map(|d| (d[1], d[0])).collect();
    if expected_shapes != header.shapes {
        return Err(corrupt("layer shapes disagree with architecture"));
    }
    let params = &body[header_end..];
    let count: usize = header.shapes.iter().map(|(o, i)| o * i + o).sum();
    if params.len() != 8 * count {
        return Err(corrupt("parameter block has the wrong size"));
    }
    let mut values = params
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let layers = header
        .shapes
        .iter()
        .map(|&(outputs, inputs)| Layer {
            inputs,
            outputs,
            weights: values.by_ref().take(outputs * inputs).collect(),
            bias: values.by_ref().take(outputs).collect(),
        })
        .collect();
    Ok(Model {
        architecture: header.architecture,
        layers,
        scaler: header.scaler,
        meta: header.meta,
    })
}

pub fn model_to_json(model: &Model) -> Result<Vec<u8>> {
    let doc = JsonModel {
        format: JSON_FORMAT.into(),
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    Ok(serde_json::to_vec_pretty(&doc)?)
}

fn model_from_json(bytes: &[u8]) -> Result<Model> {
    let doc: JsonModel =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptModel(format!("json: {e}")))?;
    if doc.format != JSON_FORMAT {
        return Err(Error::CorruptModel(format!("unknown format {:?}", doc.format)));
    }
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: doc.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let m = doc.model;
    m.architecture.validate()?;
    let ok = m.layers.len() + 1 == m.architecture.layer_dims.len()
        && m.layers.iter().zip(m.architecture.layer_dims.windows(2)).all(|(l, d)| {
            l.inputs == d[0] && l.outputs == d[1] && l.weights.len() == d[0] * d[1] && l.bias.len() == d[1]
        });
    if !ok {
        return Err(Error::CorruptModel("layer shapes disagree with architecture".into()));
    }
    Ok(m)
}

/// Writes JSON when `path` ends in `.json`, the binary container otherwise.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let bytes = if path.extension().is_some_and(|e| e == "json") {
        model_to_json(model)?
    } else {
        model_to_bytes(model)?
    };
    fs::write(path, bytes).map_err(|e| Error::file(path, e))
}

/// Reads either format, detected from the content.
pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
    if bytes.starts_with(MAGIC) {
        model_from_bytes(&bytes)
    } else {
        model_from_json(&bytes)
    }
}
