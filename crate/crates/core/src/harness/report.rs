use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::plotdata::{emit_plotdata, Series};
use crate::error::{LabError, Result};

/// One graded claim of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything an experiment produces. Written as
///
/// ```text
/// <dir>/summary.json
/// <dir>/tables/<name>.csv
/// <dir>/plotdata/<series>.dat
/// <dir>/<other files>
/// ```
#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    /// Experiment-specific results; merged into `summary.json`.
    pub results: Map<String, Value>,
    pub tables: BTreeMap<String, String>,
    pub plotdata: Vec<Series>,
    /// Extra files (binary dumps) keyed by file name.
    pub files: BTreeMap<String, Vec<u8>>,
    pub verdicts: Vec<Verdict>,
    /// Per-point failures; any entry marks the bundle incomplete.
    pub failures: Vec<String>,
    pub refs: Vec<String>,
    pub config: Value,
}

impl ReportBundle {
    pub fn put(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.results.insert(key.to_string(), v);
    }

    pub fn verdict(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
    }

    pub fn incomplete(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn result(&self, key: &str) -> Option<&Value> {
        self.results.get(key)
    }

    pub fn summary(&self) -> Value {
        let mut m = Map::new();
        m.insert("config".into(), self.config.clone());
        m.insert("refs".into(), serde_json::json!(self.refs));
        m.insert("incomplete".into(), Value::Bool(self.incomplete()));
        m.insert("failures".into(), serde_json::json!(self.failures));
        m.insert("passed".into(), Value::Bool(self.passed()));
        m.insert("verdicts".into(), serde_json::json!(self.verdicts));
        m.insert("results".into(), Value::Object(self.results.clone()));
        Value::Object(m)
    }

    /// Writes the bundle into a fresh directory next to `dir` and renames it
    /// into place, so readers never see a half-written report.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent).map_err(|e| LabError::io(&parent, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".xsb-report-")
            .tempdir_in(&parent)
            .map_err(|e| LabError::io(&parent, e))?;
        let root = staging.path();
        let write = |path: PathBuf, bytes: &[u8]| -> Result<()> {
            if let Some(p) = path.parent() {
                std::fs::create_dir_all(p).map_err(|e| LabError::io(p, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))
        };
        let summary = serde_json::to_string_pretty(&self.summary())
            .map_err(|e| LabError::Format(e.to_string()))?;
        write(root.join("summary.json"), summary.as_bytes())?;
        for (name, csv) in &self.tables {
            write(root.join("tables").join(format!("{name}.csv")), csv.as_bytes())?;
        }
        for (name, bytes) in &self.files {
            write(root.join(name), bytes)?;
        }
        if !self.plotdata.is_empty() {
            emit_plotdata(&self.plotdata, &root.join("plotdata"))?;
        }
        let staged = staging.keep();
        let backup = parent.join(format!(
            ".xsb-report-old-{}-{}",
            std::process::id(),
            dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
        ));
        let had_old = dir.exists();
        if had_old {
            std::fs::rename(dir, &backup).map_err(|e| LabError::io(dir, e))?;
        }
        if let Err(e) = std::fs::rename(&staged, dir) {
            if had_old {
                let _ = std::fs::rename(&backup, dir);
            }
            let _ = std::fs::remove_dir_all(&staged);
            return Err(LabError::io(dir, e));
        }
        if had_old {
            std::fs::remove_dir_all(&backup).map_err(|e| LabError::io(&backup, e))?;
        }
        Ok(dir.to_path_buf())
    }
}
