//! Output files: CSV for point and zero data, JSON for scalar reports.
//! Every artifact carries the tool version, a hash of the config and the seed.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_901;

/// Hex SHA-256 of the compact JSON rendering (object keys sorted).
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    let mut s = String::with_capacity(64);
    for byte in digest.iter() {
        let _ = write!(s, "{byte:02x}");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(config: &Value, seed: Option<u64>) -> Self {
        Self {
            tool: "polyens",
            version: VERSION,
            config_hash: config_hash(config),
            seed,
        }
    }

    fn header_line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# {} {} config={} seed={}", self.tool, self.version, self.config_hash, seed)
    }
}

/// Rows of a CSV table, written all at once.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(columns: I) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Meta) -> String {
        let mut out = meta.header_line();
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip rendering of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn render_json(meta: &Meta, body: Value) -> String {
    let mut doc = json!({ "meta": meta });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

/// Write to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
