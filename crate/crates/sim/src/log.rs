//! Event logs and their canonical text form.
//!
//! One record per line, keys sorted, every real printed with exactly nine
//! decimals so golden files compare byte-for-byte across platforms.

use std::fmt::Write as _;
use std::path::Path;

use crossdrop_core::ConfigError;
use crossdrop_hub::Message;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub tick: u64,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let v = serde_json::to_value(r).expect("records serialize");
            write_canonical(&mut out, &v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_ndjson())
    }
}

/// Writes `v` with sorted keys, no whitespace and fixed nine-decimal reals.
pub fn write_canonical(out: &mut String, v: &Value) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                let s = format!("{x:.9}");
                // -0.000000000 and 0.000000000 must render alike.
                if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
                    out.push_str(s.trim_start_matches('-'));
                } else {
                    out.push_str(&s);
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Parses a log file into one JSON value per non-empty line.
pub fn read_records(path: &Path) -> Result<Vec<Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path, format!("cannot read log: {e}")))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ConfigError::new(path, e.to_string()).at(i + 1, e.column()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diff {
    /// Index of the first record that differs, `None` when the logs are equal.
    pub first: Option<usize>,
    pub rendered: String,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.first.is_none()
    }
}

/// Compares two record lists structurally.
pub fn diff_records(log: &[Value], golden: &[Value]) -> Diff {
    for i in 0..log.len().max(golden.len()) {
        let (a, b) = (log.get(i), golden.get(i));
        if a == b {
            continue;
        }
        let rendered = match (a, b) {
            (Some(a), Some(b)) => {
                let path = first_difference(a, b, String::new()).unwrap_or_default();
                format!(
                    "record {i} differs at {}\n  log:    {}\n  golden: {}",
                    if path.is_empty() { "<root>" } else { &path },
                    render(a),
                    render(b)
                )
            }
            (Some(a), None) => format!("record {i} only in log: {}", render(a)),
            (None, Some(b)) => format!("record {i} only in golden: {}", render(b)),
            (None, None) => unreachable!(),
        };
        return Diff {
            first: Some(i),
            rendered,
        };
    }
    Diff {
        first: None,
        rendered: String::new(),
    }
}

fn render(v: &Value) -> String {
    let mut s = String::new();
    write_canonical(&mut s, v);
    s
}

/// JSON-pointer-like path of the first leaf where `a` and `b` disagree.
fn first_difference(a: &Value, b: &Value, at: String) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().find_map(|k| match (x.get(k), y.get(k)) {
                (Some(p), Some(q)) => first_difference(p, q, format!("{at}/{k}")),
                _ => Some(format!("{at}/{k}")),
            })
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .find_map(|(i, (p, q))| first_difference(p, q, format!("{at}/{i}"))),
        _ if a == b => None,
        _ => Some(at),
    }
}

pub fn verify_log(log_path: &Path, golden_path: &Path) -> Result<Diff, ConfigError> {
    let log = read_records(log_path)?;
    let golden = read_records(golden_path)?;
    Ok(diff_records(&log, &golden))
}
