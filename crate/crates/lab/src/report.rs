//! Run reports, their canonical serialization, and the optional memo
//! directory named by `FULFILLMENT_LAB_CACHE`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "FULFILLMENT_LAB_CACHE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

/// Machine-readable result of one command.
///
/// Work counters stand in for timing: a wall-clock field would break
/// byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    pub config: Value,
    pub outcome: String,
    pub exit_code: i32,
    pub checks: Vec<Check>,
    pub counterexamples: Vec<Value>,
    pub stats: BTreeMap<String, u64>,
    /// The human-readable table printed on standard output.
    pub summary: Vec<String>,
    pub data: Value,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            outcome: String::new(),
            exit_code: 0,
            checks: Vec::new(),
            counterexamples: Vec::new(),
            stats: BTreeMap::new(),
            summary: Vec::new(),
            data: Value::Null,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    pub fn stat(&mut self, name: &str, value: u64) {
        self.stats.insert(name.to_string(), value);
    }

    /// Pretty JSON with every object's keys sorted, newline terminated.
    pub fn to_canonical_json(&self) -> String {
        let v = serde_json::to_value(self).map(canonicalize).unwrap_or(Value::Null);
        let mut s = serde_json::to_string_pretty(&v).unwrap_or_default();
        s.push('\n');
        s
    }

    /// Writes `<dir>/<command>.json`.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.command));
        std::fs::write(&path, self.to_canonical_json())?;
        Ok(path)
    }
}

/// Rebuilds objects with sorted keys, independent of how `serde_json` maps
/// are configured elsewhere in the build.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, canonicalize(v))).collect();
            Value::Object(sorted.into_iter().collect::<Map<_, _>>())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// SHA-256 over the canonical config and the contents of every input file.
pub fn cache_key(config: &Value, inputs: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    h.update(canonicalize(config.clone()).to_string().as_bytes());
    for input in inputs {
        h.update((input.len() as u64).to_le_bytes());
        h.update(input);
    }
    hex::encode(h.finalize())
}

/// Memo directory of finished reports keyed by [`cache_key`].
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(Cache::new)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored report, ignoring unreadable or foreign entries.
    pub fn get(&self, key: &str) -> Option<RunReport> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let r: RunReport = serde_json::from_str(&text).ok()?;
        (r.schema_version == SCHEMA_VERSION).then_some(r)
    }

    pub fn put(&self, key: &str, report: &RunReport) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(self.path(key), report.to_canonical_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_json_sorts_keys() {
        let mut r = RunReport::new("ph", json!({ "z": 1, "a": { "y": 2, "b": 3 } }));
        r.stat("nodes", 5);
        let s = r.to_canonical_json();
        let a = s.find("\"a\"").unwrap();
        let z = s.find("\"z\"").unwrap();
        assert!(a < z);
        assert!(s.find("\"b\"").unwrap() < s.find("\"y\"").unwrap());
        let back: RunReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn cache_keys_depend_on_inputs() {
        let c = json!({ "n": 3 });
        assert_eq!(cache_key(&c, &[b"a".to_vec()]), cache_key(&c, &[b"a".to_vec()]));
        assert_ne!(cache_key(&c, &[b"a".to_vec()]), cache_key(&c, &[b"b".to_vec()]));
        assert_ne!(cache_key(&c, &[b"ab".to_vec()]), cache_key(&c, &[b"a".to_vec(), b"b".to_vec()]));
        assert_eq!(cache_key(&c, &[]).len(), 64);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let r = RunReport::new("enumerate", json!({}));
        assert!(cache.get("k").is_none());
        cache.put("k", &r).unwrap();
        assert_eq!(cache.get("k"), Some(r));
    }
}
