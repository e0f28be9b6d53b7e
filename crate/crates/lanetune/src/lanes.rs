//! Tusimple lane records: one JSON object per line with `lanes`,
//! `h_samples` and `raw_file`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use lanetune_core::eval::LaneRecord;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawRecord {
    lanes: Vec<Vec<f64>>,
    h_samples: Vec<f64>,
    raw_file: String,
}

/// Parses line-delimited records, validating each one. Blank lines are
/// skipped; errors carry the 1-based line number.
pub fn parse_lane_records(reader: impl Read) -> Result<Vec<LaneRecord>> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let parse_err = |reason: String| Error::Parse {
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let record = LaneRecord {
            raw_file: raw.raw_file,
            h_samples: raw.h_samples,
            lanes: raw.lanes,
        };
        record.validate().map_err(|e| parse_err(e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn read_lane_records(path: &Path) -> Result<Vec<LaneRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lane_records(file).map_err(|e| match e {
        Error::Parse { line, reason } => Error::RecordFile {
            path: path.to_owned(),
            line,
            reason,
        },
        other => other,
    })
}

/// Integral values print without a fractional part, as the reference
/// tooling writes them.
fn push_number(out: &mut String, x: f64) {
    if x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 {
        write!(out, "{}", x as i64).unwrap();
    } else {
        write!(out, "{x}").unwrap();
    }
}

fn push_list(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_number(out, x);
    }
    out.push(']');
}

/// One record as a single line of JSON, without the trailing newline.
pub fn format_lane_record(record: &LaneRecord) -> String {
    let mut out = String::from("{\"lanes\": [");
    for (i, lane) in record.lanes.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_list(&mut out, lane);
    }
    out.push_str("], \"h_samples\": ");
    push_list(&mut out, &record.h_samples);
    out.push_str(", \"raw_file\": ");
    out.push_str(&serde_json::to_string(&record.raw_file).expect("strings serialize"));
    out.push('}');
    out
}

pub fn format_lane_records(records: &[LaneRecord]) -> String {
    records
        .iter()
        .map(|r| format_lane_record(r) + "\n")
        .collect()
}

pub fn write_lane_records(path: &Path, records: &[LaneRecord]) -> Result<()> {
    fs::write(path, format_lane_records(records)).map_err(|e| Error::io(path, e))
}
