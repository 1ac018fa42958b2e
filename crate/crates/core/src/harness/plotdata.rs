//! Plain-text `(x, y)` series for external plotting tools.
//!
//! ```text
//! # series=ratio
//! # x=N
//! 64 0.5
//! 128 0.7071067811865476
//! ```
//!
//! Values are written in Rust's shortest round-trip form, so parsing an
//! emitted file reproduces the series bit for bit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    /// Written as `# key=value` header lines, in key order.
    pub meta: BTreeMap<String, String>,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            meta: BTreeMap::new(),
            points,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn render(&self) -> Result<String> {
        if self.points.is_empty() {
            return Err(LabError::Precondition(format!("series `{}` is empty", self.name)));
        }
        let mut out = format!("# series={}\n", self.name);
        for (k, v) in &self.meta {
            if k == "series" || k.contains('=') || k.contains('\n') || v.contains('\n') {
                return Err(LabError::param("meta", format!("unwritable header entry `{k}`")));
            }
            out.push_str(&format!("# {k}={v}\n"));
        }
        for (x, y) in &self.points {
            out.push_str(&format!("{x:?} {y:?}\n"));
        }
        Ok(out)
    }
}

/// Writes one `<name>.dat` file per series into `dir`.
pub fn emit_plotdata(series: &[Series], dir: &Path) -> Result<Vec<PathBuf>> {
    if series.is_empty() {
        return Err(LabError::Precondition("no series to emit".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    series
        .iter()
        .map(|s| {
            let path = dir.join(format!("{}.dat", s.name));
            std::fs::write(&path, s.render()?).map_err(|e| LabError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn parse_plotdata(text: &str) -> Result<Series> {
    let mut name = None;
    let mut meta = BTreeMap::new();
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let bad = |what: &str| LabError::Format(format!("line {}: {what}: `{line}`", lineno + 1));
        if let Some(header) = line.strip_prefix('#') {
            let (k, v) = header.trim_start().split_once('=').ok_or_else(|| bad("header without `=`"))?;
            if k == "series" {
                name = Some(v.to_string());
            } else {
                meta.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let mut next = || -> Result<f64> {
            cols.next()
                .ok_or_else(|| bad("missing column"))?
                .parse()
                .map_err(|_| bad("not a number"))
        };
        let point = (next()?, next()?);
        if cols.next().is_some() {
            return Err(bad("more than two columns"));
        }
        points.push(point);
    }
    Ok(Series {
        name: name.ok_or_else(|| LabError::Format("missing `# series=` header".into()))?,
        meta,
        points,
    })
}
