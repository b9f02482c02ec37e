//! Deterministic reports: sorted keys, floats at 17 significant digits,
//! atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use fiberaudit_core::Result;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Pretty JSON with object keys sorted and every float written as
/// `d.dddddddddddddddde±x`.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, value: &Value, level: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                write!(out, "{:.16e}", n.as_f64().expect("JSON numbers are finite")).unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialise")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // scalar arrays (coordinates) stay on one line
            if items.iter().all(|v| !v.is_array() && !v.is_object()) {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, level);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, v, level + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(k).expect("strings serialise"));
                out.push_str(": ");
                write_value(out, &map[k.as_str()], level + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push('}');
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialise")
}

/// SHA-256 over the input files (name and bytes, in argument order)
/// followed by the resolved configuration.
#[derive(Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(mut self, config: &Value) -> String {
        self.add("config", canonical_json(config).as_bytes());
        hex::encode(self.hasher.finalize())
    }
}

/// A run report.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub input_digest: String,
    pub result: Value,
    pub evaluations: Option<u64>,
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, digest: InputDigest, result: Value) -> Self {
        let input_digest = digest.finish(&config);
        Report {
            command,
            config,
            input_digest,
            result,
            evaluations: None,
            wall_time: None,
        }
    }

    pub fn render(&self) -> String {
        let mut map = Map::new();
        map.insert("command".into(), Value::from(self.command));
        map.insert("config".into(), self.config.clone());
        map.insert(
            "input_digest".into(),
            Value::from(self.input_digest.clone()),
        );
        map.insert("result".into(), self.result.clone());
        map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        if let Some(e) = self.evaluations {
            map.insert("evaluations".into(), Value::from(e));
        }
        if let Some(t) = self.wall_time {
            map.insert("wall_time_seconds".into(), Value::from(t));
        }
        canonical_json(&Value::Object(map))
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
        }
    }
    Ok(())
}
