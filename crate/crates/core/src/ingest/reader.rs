//! Sharded NDJSON reading.
//!
//! Lines are read sequentially, cut into shards of `shard_lines`, parsed on
//! the rayon pool, then handed to the sink in original file order. Duplicate
//! ids are resolved in that order too (first occurrence wins), so results do
//! not depend on the shard size or the number of workers.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::message::{parse_message, ParseError, RawMessage};

pub const DEFAULT_SHARD_LINES: usize = 1 << 15;

/// One rejected input line, as written to `rejects.ndjson`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_no: u64,
    pub error_kind: String,
    pub detail: String,
}

impl Reject {
    pub fn new(source: &str, err: &ParseError) -> Self {
        Reject {
            line_no: err.line(),
            error_kind: err.kind().to_string(),
            detail: if source.is_empty() {
                err.detail()
            } else {
                format!("{source}: {}", err.detail())
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub shard_lines: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            shard_lines: DEFAULT_SHARD_LINES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Non-blank lines seen.
    pub lines: u64,
    pub accepted: u64,
    pub rejects: Vec<Reject>,
}

/// Opens a file for line reading, decompressing `.gz` transparently.
pub fn open_lines(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    let gz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    Ok(if gz {
        Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::with_capacity(1 << 16, file))
    })
}

type Parsed<T> = Result<(u64, u64, T), ParseError>;

fn parse_shard<T, P>(lines: &[(u64, Vec<u8>)], prepare: &P) -> Vec<Parsed<T>>
where
    P: Fn(RawMessage) -> T + Sync,
{
    lines
        .iter()
        .map(|(no, raw)| {
            let text = std::str::from_utf8(raw).map_err(|e| ParseError::MalformedJson {
                line: *no,
                detail: format!("invalid UTF-8: {e}"),
            })?;
            let msg = parse_message(text, *no)?;
            Ok((*no, msg.message_id, prepare(msg)))
        })
        .collect()
}

/// Stream-ingests `reader`, calling `prepare` on every parsed message in
/// parallel and `sink` on the accepted results in input order.
pub fn ingest_reader<T, P, S>(
    mut reader: impl BufRead,
    source: &str,
    opts: IngestOptions,
    seen: &mut HashSet<u64>,
    report: &mut IngestReport,
    prepare: &P,
    sink: &mut S,
) -> io::Result<()>
where
    T: Send,
    P: Fn(RawMessage) -> T + Sync,
    S: FnMut(T),
{
    let shard_lines = opts.shard_lines.max(1);
    let batch_lines = shard_lines * rayon::current_num_threads().max(1) * 2;
    let mut line_no = 0u64;
    let mut done = false;
    while !done {
        let mut batch: Vec<(u64, Vec<u8>)> = Vec::with_capacity(batch_lines.min(1 << 20));
        while batch.len() < batch_lines {
            let mut buf = Vec::new();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                done = true;
                break;
            }
            line_no += 1;
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            if buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            batch.push((line_no, buf));
        }
        report.lines += batch.len() as u64;
        let parsed: Vec<Vec<Parsed<T>>> = batch
            .par_chunks(shard_lines)
            .map(|shard| parse_shard(shard, prepare))
            .collect();
        for item in parsed.into_iter().flatten() {
            match item {
                Ok((line, id, value)) => {
                    if seen.insert(id) {
                        report.accepted += 1;
                        sink(value);
                    } else {
                        report.rejects.push(Reject::new(source, &ParseError::DuplicateId { line, id }));
                    }
                }
                Err(e) => report.rejects.push(Reject::new(source, &e)),
            }
        }
    }
    Ok(())
}

/// Ingests every file in order. See [`ingest_reader`].
pub fn ingest_files<T, P, S>(paths: &[PathBuf], opts: IngestOptions, prepare: P, mut sink: S) -> Result<IngestReport, ReadError>
where
    T: Send,
    P: Fn(RawMessage) -> T + Sync,
    S: FnMut(T),
{
    let mut seen = HashSet::new();
    let mut report = IngestReport::default();
    for path in paths {
        let io_err = |source| ReadError::Io {
            path: path.display().to_string(),
            source,
        };
        let reader = open_lines(path).map_err(io_err)?;
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        ingest_reader(reader, &name, opts, &mut seen, &mut report, &prepare, &mut sink).map_err(io_err)?;
    }
    Ok(report)
}

/// Parses an in-memory NDJSON corpus.
pub fn parse_corpus(text: &str) -> (Vec<RawMessage>, IngestReport) {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut report = IngestReport::default();
    ingest_reader(
        text.as_bytes(),
        "",
        IngestOptions::default(),
        &mut seen,
        &mut report,
        &|m| m,
        &mut |m| out.push(m),
    )
    .expect("in-memory reads do not fail");
    (out, report)
}
