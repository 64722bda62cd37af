//! Artifact writers: results.csv, summary.json, manifest.json, chart.svg.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const RESULTS_CSV: &str = "results.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const CHART_SVG: &str = "chart.svg";

const HEADER: [&str; 5] = ["experiment", "seed", "label", "metric", "value"];

/// One observation in tidy long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    /// Master seed, per-replication index, or `all` for aggregates.
    pub seed: String,
    /// Policy or parameter setting the metric belongs to.
    pub label: String,
    pub metric: String,
    pub value: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            r.seed.as_str(),
            r.label.as_str(),
            r.metric.as_str(),
            format_value(r.value).as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.context("malformed results row"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Running,
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub master_seed: u64,
    /// Worker threads; results do not depend on it.
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, preset: Option<String>, threads: usize) -> Self {
        Manifest {
            tool: "myopic".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: RunStatus::Running,
            error: None,
            master_seed: config.seed,
            threads,
            preset,
            artifacts: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_JSON), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes through a temporary sibling so readers never see half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", path.display()))
}
