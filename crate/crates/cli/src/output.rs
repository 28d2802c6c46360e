//! Flat-file writers. Every record type renders both as a CSV row and as a
//! JSON line; CSV numbers carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// A record that can be written in either output format.
pub trait Row: Serialize {
    fn header(&self) -> Vec<&'static str>;
    fn cells(&self) -> Vec<String>;
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_records<R: Row>(path: &str, format: Format, records: &[R]) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(path, records),
        Format::Jsonl => write_jsonl(path, records),
    }
}

pub fn write_csv<R: Row>(path: &str, records: &[R]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    if let Some(first) = records.first() {
        w.write_record(first.header()).map_err(|e| io(e.into()))?;
    }
    for r in records {
        w.write_record(r.cells()).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

pub fn write_jsonl<S: Serialize>(path: &str, records: &[S]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}
