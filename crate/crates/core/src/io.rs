//! The shared long-format CSV schema and artifact layout.
//!
//! Every numeric artifact is a pair of files: `<stem>.json` holding one
//! metadata record, and `<stem>.csv` with header `t,k,value,kind`. Floats
//! are written with 17 significant digits (`{:.16e}`), so values survive a
//! write/read cycle bit-exactly. `k` is the size for per-size kinds and `0`
//! for scalar kinds.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,k,value,kind";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub t: f64,
    pub k: u64,
    pub value: f64,
    pub kind: String,
}

impl Row {
    pub fn new(t: f64, k: u64, value: f64, kind: &str) -> Self {
        Row {
            t,
            k,
            value,
            kind: kind.to_string(),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", fmt_float(r.t), r.k, fmt_float(r.value), r.kind)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        Some(Ok(h)) => return Err(Error::Format(format!("line 1: expected header `{CSV_HEADER}`, got `{h}`"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(Error::Format("empty CSV".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("line {lineno}: expected 4 fields, got {}", fields.len())));
        }
        let bad = |what: &str| Error::Format(format!("line {lineno}: bad {what} in `{line}`"));
        rows.push(Row {
            t: fields[0].parse().map_err(|_| bad("t"))?,
            k: fields[1].parse().map_err(|_| bad("k"))?,
            value: fields[2].parse().map_err(|_| bad("value"))?,
            kind: fields[3].trim().to_string(),
        });
    }
    Ok(rows)
}

/// Paths of the metadata and CSV files for `stem`.
pub fn artifact_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("csv"))
}

/// Write `<stem>.json` and `<stem>.csv`. Refuses to overwrite unless
/// `force` is set.
pub fn write_artifact<M: Serialize>(stem: &Path, meta: &M, rows: &[Row], force: bool) -> Result<()> {
    let (json, csv) = artifact_paths(stem);
    for p in [&json, &csv] {
        if p.exists() && !force {
            return Err(Error::invalid(format!(
                "{} exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    if let Some(dir) = json.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(&json, text)?;
    write_rows(fs::File::create(&csv)?, rows)
}

pub fn read_artifact<M: DeserializeOwned>(stem: &Path) -> Result<(M, Vec<Row>)> {
    let (json, csv) = artifact_paths(stem);
    let meta = serde_json::from_slice(&fs::read(&json)?)?;
    let rows = read_rows(fs::File::open(&csv)?)?;
    Ok((meta, rows))
}

/// Group rows by time, preserving first-seen time order.
pub(crate) fn group_by_time(rows: &[Row]) -> Vec<(f64, Vec<&Row>)> {
    let mut out: Vec<(f64, Vec<&Row>)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((t, group)) if t.to_bits() == r.t.to_bits() => group.push(r),
            _ => out.push((r.t, vec![r])),
        }
    }
    out
}
