use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Experiment, RunConfig};
use crate::comparison::Check;
use crate::error::{Error, Result};

/// Artifact version embedded in every report.
pub const VERSION: &str = concat!("lorentz-lab ", env!("CARGO_PKG_VERSION"));

/// File name of the structured report inside the output directory.
pub const REPORT_FILE: &str = "report.toml";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub experiment: Experiment,
    pub model: Option<String>,
    pub verdict: Verdict,
    pub runtime_s: f64,
    pub seed: u64,
    /// Set when the experiment aborted.
    pub error: Option<String>,
    /// Sidecar files written next to the report, sorted.
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub config: RunConfig,
    /// Experiment-specific summary values.
    pub result: toml::Table,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(REPORT_FILE);
        std::fs::write(&path, self.to_toml()?)?;
        Ok(path)
    }
}

/// The fields `report summarize` needs; tolerant of config drift.
#[derive(Clone, Debug, Deserialize)]
pub struct ReportHeader {
    pub version: String,
    pub experiment: String,
    pub model: Option<String>,
    pub verdict: Verdict,
    pub runtime_s: f64,
    pub error: Option<String>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

/// Collects sidecar files of one run and renders numbers reproducibly.
pub(crate) struct Sidecars {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

pub(crate) fn num(v: f64) -> String {
    format!("{v:.17e}")
}

impl Sidecars {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Two-column plot data.
    pub fn dat(&mut self, name: &str, rows: &[(f64, f64)]) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(self.path(name))?);
        for (a, b) in rows {
            writeln!(f, "{} {}", num(*a), num(*b))?;
        }
        f.flush()?;
        Ok(())
    }

    /// Registers files written by library helpers.
    pub fn adopt(&mut self, paths: &[PathBuf]) {
        for p in paths {
            if let Some(n) = p.file_name().and_then(|n| n.to_str()) {
                self.files.push(n.to_string());
            }
        }
    }

    pub fn into_files(mut self) -> Vec<String> {
        self.files.sort();
        self.files.dedup();
        self.files
    }
}

/// Every `report.toml` below `dir` (depth-first, sorted by path).
pub fn find_reports(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == REPORT_FILE) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn read_header(path: &Path) -> Result<ReportHeader> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {}", path.display(), e.message())))
}
