//! Growth and drawdown statistics over sets of wealth paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Path;

/// Quantile levels reported for terminal wealth.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    /// Average of `ln(W_T / W_0) / T` across paths.
    pub mean_log_growth: f64,
    pub growth_std_error: f64,
    /// Worst peak-to-trough loss over all paths, in `[0, 1]`.
    pub max_drawdown: f64,
    /// `(level, W_T / W_0)` pairs, non-decreasing in both coordinates.
    /// Interpolated in log space; entries overflow to infinity for very long
    /// compounding runs, in which case the log version below is the one to
    /// read.
    pub terminal_wealth_quantiles: Vec<(f64, f64)>,
    /// `(level, ln(W_T / W_0))` pairs.
    pub terminal_log_wealth_quantiles: Vec<(f64, f64)>,
    pub n_paths: usize,
}

/// Per-path reduction used when the paths themselves are too large to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub log_growth: f64,
    pub max_drawdown: f64,
    /// `ln(W_T / W_0)`.
    pub terminal_log_wealth: f64,
}

impl PathMetrics {
    pub fn from_wealth(path: &Path) -> Result<Self> {
        Self::from_wealth_indexed(path, 0)
    }

    /// Metrics of a path of `ln W_t` values.
    pub fn from_log_wealth(path: &Path) -> Self {
        let values = path.values();
        let total = path.last() - path.first();
        let horizon = path.horizon();
        let mut peak = f64::NEG_INFINITY;
        let mut worst = 0.0f64;
        for &l in values {
            peak = peak.max(l);
            worst = worst.max(-(l - peak).exp_m1());
        }
        PathMetrics {
            log_growth: if horizon > 0.0 { total / horizon } else { 0.0 },
            max_drawdown: worst.clamp(0.0, 1.0),
            terminal_log_wealth: total,
        }
    }

    fn from_wealth_indexed(path: &Path, which: usize) -> Result<Self> {
        let values = path.values();
        if let Some(index) = values.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::NonPositiveWealth {
                path: which,
                index,
                value: values[index],
            });
        }
        let horizon = path.horizon();
        let total = (path.last() / path.first()).ln();
        Ok(PathMetrics {
            log_growth: if horizon > 0.0 { total / horizon } else { 0.0 },
            max_drawdown: max_drawdown(values),
            terminal_log_wealth: total,
        })
    }
}

/// Largest `1 - W_t / max_{s<=t} W_s` along a positive series.
pub fn max_drawdown(values: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &w in values {
        peak = peak.max(w);
        worst = worst.max(1.0 - w / peak);
    }
    worst.clamp(0.0, 1.0)
}

/// Summarizes wealth paths sharing one time grid.
pub fn summarize(wealth_paths: &[Path]) -> Result<SummaryStats> {
    let first = wealth_paths
        .first()
        .ok_or(Error::EmptyInput("no wealth paths to summarize"))?;
    let mut metrics = Vec::with_capacity(wealth_paths.len());
    for (i, path) in wealth_paths.iter().enumerate() {
        if !path.same_grid(first) {
            return Err(Error::GridMismatch(format!(
                "path {i} does not share the grid of path 0"
            )));
        }
        metrics.push(PathMetrics::from_wealth_indexed(path, i)?);
    }
    summarize_metrics(&metrics)
}

/// Summarizes wealth paths stored as `ln W_t`.
pub fn summarize_log_wealth(log_paths: &[Path]) -> Result<SummaryStats> {
    let first = log_paths
        .first()
        .ok_or(Error::EmptyInput("no wealth paths to summarize"))?;
    let mut metrics = Vec::with_capacity(log_paths.len());
    for (i, path) in log_paths.iter().enumerate() {
        if !path.same_grid(first) {
            return Err(Error::GridMismatch(format!(
                "path {i} does not share the grid of path 0"
            )));
        }
        metrics.push(PathMetrics::from_log_wealth(path));
    }
    summarize_metrics(&metrics)
}

/// Same as [`summarize`] for already reduced paths.
///
/// Growth values are sorted before accumulation so the result does not depend
/// on the order of the input.
pub fn summarize_metrics(metrics: &[PathMetrics]) -> Result<SummaryStats> {
    if metrics.is_empty() {
        return Err(Error::EmptyInput("no wealth paths to summarize"));
    }
    let mut growth: Vec<f64> = metrics.iter().map(|m| m.log_growth).collect();
    growth.sort_by(f64::total_cmp);
    let (mean, se) = mean_and_se_sorted(&growth);

    let mut terminal: Vec<f64> = metrics.iter().map(|m| m.terminal_log_wealth).collect();
    terminal.sort_by(f64::total_cmp);
    let terminal_log_wealth_quantiles: Vec<(f64, f64)> = QUANTILE_LEVELS
        .iter()
        .map(|&q| (q, quantile_sorted(&terminal, q)))
        .collect();
    let terminal_wealth_quantiles = terminal_log_wealth_quantiles
        .iter()
        .map(|&(q, l)| (q, l.exp()))
        .collect();

    Ok(SummaryStats {
        mean_log_growth: mean,
        growth_std_error: se,
        max_drawdown: metrics.iter().map(|m| m.max_drawdown).fold(0.0, f64::max),
        terminal_wealth_quantiles,
        terminal_log_wealth_quantiles,
        n_paths: metrics.len(),
    })
}

/// Sample mean and standard error of the mean. A single sample has zero
/// reported error.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    mean_and_se_sorted(&sorted)
}

fn mean_and_se_sorted(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
