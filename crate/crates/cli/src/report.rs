//! JSON reports with a config echo, measured constants and per-invariant
//! verdicts, plus CSV tables written next to the report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

/// Environment variable naming the directory for relative output paths.
pub const OUT_DIR_VAR: &str = "QCTREE_OUT_DIR";

#[derive(Clone, Debug)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub measured: Map<String, Value>,
    pub invariants: Vec<Invariant>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report { command: command.into(), config, ..Default::default() }
    }

    pub fn measure(&mut self, key: &str, value: impl Into<Value>) {
        self.measured.insert(key.into(), value.into());
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.invariants.push(Invariant { name: name.into(), pass, detail: detail.into() });
    }

    pub fn table(&mut self, name: &str, headers: &[&str], rows: Vec<Vec<String>>) {
        self.tables.push(Table { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows });
    }

    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            crate::EXIT_PASS
        } else {
            crate::EXIT_ASSERTION
        }
    }

    pub fn to_json(&self, timestamp: bool) -> Value {
        let invariants: Vec<Value> =
            self.invariants.iter().map(|i| json!({"name": i.name, "pass": i.pass, "detail": i.detail})).collect();
        let tables: Map<String, Value> = self
            .tables
            .iter()
            .map(|t| {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(t.headers.iter().cloned().zip(r.iter().cloned().map(Value::String)).collect())
                    })
                    .collect();
                (t.name.clone(), Value::Array(rows))
            })
            .collect();
        let mut out = json!({
            "command": self.command,
            "config": self.config,
            "versions": {"qctree": env!("CARGO_PKG_VERSION"), "qctree-core": qctree_core::VERSION},
            "measured": self.measured,
            "invariants": invariants,
            "tables": tables,
            "pass": self.passed(),
        });
        if timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            out["timestamp"] = json!(secs);
        }
        out
    }

    /// Write the report to `path` and each table to `<stem>.<table>.csv`
    /// beside it, or print the report when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>, timestamp: bool) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json(timestamp))? + "\n";
        let Some(path) = path else {
            print!("{text}");
            return Ok(());
        };
        let path = output_path(path);
        write_file(&path, text.as_bytes())?;
        for t in &self.tables {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let csv_path = path.with_file_name(format!("{stem}.{}.csv", t.name));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.headers)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            write_file(&csv_path, &w.into_inner().context("csv buffer")?)?;
        }
        Ok(())
    }
}

/// Relative output paths are resolved against `QCTREE_OUT_DIR` when set.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Write pretty JSON data (a tree, function or sequence) to an output path.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_file(&output_path(path), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_invariant_sets_assertion_exit() {
        let mut r = Report::new("x", Value::Null);
        r.check("a", true, "");
        assert_eq!(r.exit_code(), crate::EXIT_PASS);
        r.check("b", false, "broken");
        assert_eq!(r.exit_code(), crate::EXIT_ASSERTION);
        assert_eq!(r.to_json(false)["pass"], Value::Bool(false));
    }

    #[test]
    fn timestamp_is_optional() {
        let r = Report::new("x", Value::Null);
        assert!(r.to_json(false).get("timestamp").is_none());
        assert!(r.to_json(true).get("timestamp").is_some());
    }
}
