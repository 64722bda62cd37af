//! Experiment runner behind the `myopic` binary.
//!
//! A run resolves a configuration, computes on a dedicated thread pool, and
//! writes its artifacts into one directory. `manifest.json` is written first
//! with status `running` and rewritten as `ok` or `failed`, so a directory is
//! never left with outputs and no manifest describing them.

pub mod chart;
pub mod config;
pub mod experiments;
pub mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use config::{ExperimentConfig, Format, OUT_DIR_ENV};
use output::{Manifest, RunStatus, CHART_SVG, MANIFEST_JSON, RESULTS_CSV, SUMMARY_JSON};

pub use config::{resolve, ConfigError, ExperimentKind, Layers};

/// Directory used when neither flags, config nor environment name one.
pub const DEFAULT_OUT_DIR: &str = "myopic-out";

/// Output directory: flag, then config file, then `MYOPIC_OUT_DIR`.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs `config` on `threads` workers (0 picks the machine default) and
/// writes its artifacts to `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, threads: usize, preset: Option<String>) -> Result<Manifest> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for stale in [RESULTS_CSV, SUMMARY_JSON, CHART_SVG] {
        let path = out_dir.join(stale);
        if path.exists() {
            fs::remove_file(&path).with_context(|| format!("removing stale {}", path.display()))?;
        }
    }
    let mut config = config.clone();
    config.out_dir = Some(out_dir.to_path_buf());
    let mut manifest = Manifest::new(&config, preset, threads);
    manifest.write(out_dir)?;

    let result = compute_and_write(&config, out_dir, threads);
    match &result {
        Ok(artifacts) => {
            manifest.status = RunStatus::Ok;
            manifest.artifacts = artifacts.clone();
        }
        Err(err) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(format!("{err:#}"));
        }
    }
    manifest.write(out_dir)?;
    result.map(|_| manifest)
}

fn compute_and_write(config: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<Vec<String>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("starting worker threads")?;
    let outcome = pool.install(|| experiments::execute(config))?;

    let mut artifacts = vec![MANIFEST_JSON.to_string()];
    if config.formats.contains(&Format::Csv) {
        let mut bytes = Vec::new();
        output::write_csv(&outcome.rows, &mut bytes)?;
        output::write_atomic(&out_dir.join(RESULTS_CSV), &bytes)?;
        artifacts.push(RESULTS_CSV.into());
    }
    if config.formats.contains(&Format::Json) {
        output::write_json(&out_dir.join(SUMMARY_JSON), &outcome.summary)?;
        artifacts.push(SUMMARY_JSON.into());
    }
    if config.formats.contains(&Format::Svg) {
        if let Some(svg) = chart::render(config.experiment, &outcome.rows) {
            output::write_atomic(&out_dir.join(CHART_SVG), svg.as_bytes())?;
            artifacts.push(CHART_SVG.into());
        }
    }
    Ok(artifacts)
}
