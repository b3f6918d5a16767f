//! File formats shared by the pipeline stages.
//!
//! A document stream is JSON Lines: one header object carrying the
//! vocabulary and channel names, then one document per line.
//!
//! ```text
//! {"format":"mpdhp-docs","version":1,"vocabulary":["climate",...],"channels":["worldnews",...]}
//! {"id":0,"time":0.0,"channel":0,"score":20,"words":[[3,1],[7,2]]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, DocumentStream, RawRecord, Vocabulary};
use crate::error::{Error, Result};

pub const DOCS_FORMAT: &str = "mpdhp-docs";
pub const DOCS_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct StreamHeader {
    format: String,
    version: u32,
    vocabulary: Vocabulary,
    channels: Vec<String>,
}

fn format_err(path: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_owned(),
        message: format!("line {line}: {message}"),
    }
}

/// Reads raw archive records, skipping blank lines.
pub fn read_records(path: &Path) -> Result<Vec<RawRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format_err(path, i + 1, e))?);
    }
    Ok(out)
}

pub fn write_stream(path: &Path, stream: &DocumentStream) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let header = StreamHeader {
        format: DOCS_FORMAT.into(),
        version: DOCS_VERSION,
        vocabulary: stream.vocabulary.clone(),
        channels: stream.channels.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for d in &stream.documents {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a document stream and checks its invariants (sorted nonnegative
/// times, in-vocabulary words, nonempty documents).
pub fn read_stream(path: &Path) -> Result<DocumentStream> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().filter(|(_, l)| {
        l.as_ref().map_or(true, |s| !s.trim().is_empty())
    });
    let Some((_, first)) = lines.next() else {
        return Err(format_err(path, 1, "missing header"));
    };
    let header: StreamHeader =
        serde_json::from_str(&first?).map_err(|e| format_err(path, 1, e))?;
    if header.format != DOCS_FORMAT || header.version != DOCS_VERSION {
        return Err(format_err(
            path,
            1,
            format!("unsupported format {} v{}", header.format, header.version),
        ));
    }
    let mut documents: Vec<Document> = Vec::new();
    for (i, line) in lines {
        let d: Document = serde_json::from_str(&line?).map_err(|e| format_err(path, i + 1, e))?;
        if d.words.is_empty() || d.words.iter().any(|&(v, n)| v >= header.vocabulary.len() || n == 0) {
            return Err(format_err(path, i + 1, "empty document or word outside vocabulary"));
        }
        if d.channel >= header.channels.len() {
            return Err(format_err(path, i + 1, "channel index outside channel list"));
        }
        if !(d.time >= 0.0) || documents.last().is_some_and(|p| d.time < p.time) {
            return Err(format_err(path, i + 1, "document times must be nonnegative and sorted"));
        }
        documents.push(d);
    }
    Ok(DocumentStream {
        vocabulary: header.vocabulary,
        channels: header.channels,
        documents,
    })
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Reads a two-column `doc_id,label` CSV with a header row.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let label = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format_err(path, i + 1, "expected `doc_id,label`"))?;
        out.push(label);
    }
    Ok(out)
}
