use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{Map, Value};

/// Fields that vary between identical runs.
const VOLATILE: [&str; 2] = ["duration_ms", "jobs"];

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub bank_checksum: String,
    pub command: String,
    pub params: Value,
    pub payload: Value,
    pub witnesses: Vec<String>,
    pub duration_ms: u64,
    pub jobs: usize,
}

impl RunReport {
    /// Sorted keys throughout (serde_json maps are ordered) and a sorted
    /// witness list.
    pub fn to_value(&self) -> Value {
        let mut r = self.clone();
        r.witnesses.sort();
        serde_json::to_value(r).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes") + "\n"
    }

    /// The report without timing and worker-count fields, as compared by
    /// the golden corpus.
    pub fn canonical(&self) -> String {
        canonical_text(&self.to_value())
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn canonical_text(report: &Value) -> String {
    let mut v = report.clone();
    if let Value::Object(map) = &mut v {
        for key in VOLATILE {
            map.remove(key);
        }
    }
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

/// A JSON object from key/value pairs.
pub fn object<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

/// Integers that fit in `i64` become JSON numbers; larger ones become
/// decimal strings.
pub fn big_value(x: &impl ToString) -> Value {
    let s = x.to_string();
    match s.parse::<i64>() {
        Ok(n) => Value::from(n),
        Err(_) => Value::String(s),
    }
}
