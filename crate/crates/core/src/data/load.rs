use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One raw implicit-feedback event as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEvent {
    pub user: String,
    pub item: String,
    pub timestamp: i64,
    pub weight: Option<f64>,
}

impl RawEvent {
    pub fn new(user: impl Into<String>, item: impl Into<String>, timestamp: i64) -> Self {
        RawEvent { user: user.into(), item: item.into(), timestamp, weight: None }
    }
}

/// How to read a raw interaction file.
#[derive(Debug, Clone, PartialEq)]
pub struct FormatSpec {
    pub delimiter: char,
    /// Events whose weight (rating, play count) is below this are dropped
    /// before collapsing to presence. Rows without a weight always pass.
    pub min_weight: Option<f64>,
    pub skip_header: bool,
}

impl Default for FormatSpec {
    fn default() -> Self {
        FormatSpec { delimiter: '\t', min_weight: None, skip_header: false }
    }
}

pub fn load_interactions(path: &Path, format: &FormatSpec) -> Result<Vec<RawEvent>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_interactions(&text, format)
}

fn parse_timestamp(field: &str) -> Option<i64> {
    field.parse::<i64>().ok().or_else(|| {
        field.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| v.floor() as i64)
    })
}

pub fn parse_interactions(text: &str, format: &FormatSpec) -> Result<Vec<RawEvent>> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if format.skip_header && idx == 0 {
            continue;
        }
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(format.delimiter).map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 or 4 fields separated by {:?}, found {}", format.delimiter, fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse { line: line_no, message: "empty user or item id".into() });
        }
        let timestamp = parse_timestamp(fields[2]).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("timestamp `{}` is not a number", fields[2]),
        })?;
        let weight = match fields.get(3) {
            Some(w) => Some(w.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("weight `{w}` is not a number"),
            })?),
            None => None,
        };
        if let (Some(min), Some(w)) = (format.min_weight, weight) {
            if w < min {
                continue;
            }
        }
        events.push(RawEvent { user: fields[0].to_string(), item: fields[1].to_string(), timestamp, weight });
    }
    if events.is_empty() {
        return Err(Error::EmptyDataset("no events after parsing".into()));
    }
    Ok(events)
}
