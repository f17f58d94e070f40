use std::fs;
use std::path::Path;

use log::warn;

use super::{Conversation, Corpus, WordToken};
use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["word", "speaker", "start", "end"];
const HEADER_UNLABELED: [&str; 3] = ["word", "start", "end"];

/// Loader behaviour for timestamp violations.
///
/// Strict mode rejects `end < start`, negative starts and out-of-order
/// starts. Lenient mode clamps them and logs a warning instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub lenient: bool,
}

/// Parses a transcript CSV in strict mode.
pub fn parse_conversation(csv_bytes: &[u8], id: &str) -> Result<Conversation> {
    parse_conversation_with(csv_bytes, id, ParseOptions::default())
}

/// Parses a transcript CSV with header `word,speaker,start,end`.
///
/// A header of `word,start,end` is also accepted for unlabeled transcripts;
/// every token then gets an empty speaker. Row numbers in errors count the
/// header as row 1.
pub fn parse_conversation_with(
    csv_bytes: &[u8],
    id: &str,
    opts: ParseOptions,
) -> Result<Conversation> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse {
            row: 1,
            msg: e.to_string(),
        })?,
        None => {
            return Err(Error::Parse {
                row: 1,
                msg: "missing header".into(),
            })
        }
    };
    let fields: Vec<&str> = header.iter().map(|f| f.trim_start_matches('\u{feff}').trim()).collect();
    let labeled = if fields == HEADER {
        true
    } else if fields == HEADER_UNLABELED {
        false
    } else {
        return Err(Error::Parse {
            row: 1,
            msg: format!("expected header `word,speaker,start,end`, found `{}`", fields.join(",")),
        });
    };
    let width = if labeled { 4 } else { 3 };

    let mut tokens: Vec<WordToken> = Vec::new();
    for (i, record) in records.enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            msg: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                row,
                msg: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let text = &record[0];
        if text.is_empty() {
            return Err(Error::Parse {
                row,
                msg: "empty word".into(),
            });
        }
        let (speaker, start_field, end_field) = if labeled {
            (&record[1], &record[2], &record[3])
        } else {
            ("", &record[1], &record[2])
        };
        let mut start = parse_seconds(start_field, row, "start")?;
        let mut end = parse_seconds(end_field, row, "end")?;

        if start < 0.0 {
            if !opts.lenient {
                return Err(Error::Validation {
                    row,
                    msg: format!("negative start time {start}"),
                });
            }
            warn!("{id}: row {row}: negative start {start} clamped to 0");
            start = 0.0;
        }
        if let Some(prev) = tokens.last() {
            if start < prev.start {
                if !opts.lenient {
                    return Err(Error::Validation {
                        row,
                        msg: format!("start {start} precedes previous start {}", prev.start),
                    });
                }
                warn!("{id}: row {row}: start {start} clamped to previous start {}", prev.start);
                start = prev.start;
            }
        }
        if end < start {
            if !opts.lenient {
                return Err(Error::Validation {
                    row,
                    msg: format!("end {end} precedes start {start}"),
                });
            }
            warn!("{id}: row {row}: end {end} clamped to start {start}");
            end = start;
        }
        tokens.push(WordToken {
            text: text.to_string(),
            speaker: speaker.to_string(),
            start,
            end,
        });
    }
    Ok(Conversation::new(id, tokens))
}

fn parse_seconds(field: &str, row: usize, name: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        row,
        msg: format!("{name} time {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            msg: format!("{name} time {field:?} is not finite"),
        });
    }
    Ok(v)
}

/// Renders a conversation as a labeled transcript CSV. Times use the
/// shortest representation that parses back to the same `f64`.
pub fn serialize_conversation(conv: &Conversation) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for t in &conv.tokens {
        let start = t.start.to_string();
        let end = t.end.to_string();
        w.write_record([t.text.as_str(), t.speaker.as_str(), &start, &end])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Loads every `*.csv` in a directory, in file-name order. Conversation ids
/// are the file stems.
pub fn load_dir(dir: &Path, opts: ParseOptions) -> Result<Corpus> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::file(dir, e))? {
        let path = entry.map_err(|e| Error::file(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    let mut conversations = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = fs::read(&path).map_err(|e| Error::file(&path, e))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let conv = parse_conversation_with(&bytes, &id, opts).map_err(|e| match e {
            Error::Parse { row, msg } => Error::Parse {
                row,
                msg: format!("{}: {msg}", path.display()),
            },
            Error::Validation { row, msg } => Error::Validation {
                row,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })?;
        conversations.push(conv);
    }
    Corpus::new(conversations)
}

/// Writes one `<id>.csv` per conversation into `dir`, creating it if needed.
pub fn write_dir(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    for c in corpus.conversations() {
        let path = dir.join(format!("{}.csv", c.id));
        fs::write(&path, serialize_conversation(c)).map_err(|e| Error::file(&path, e))?;
    }
    Ok(())
}
