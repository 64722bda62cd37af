use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time-indexed series: prices, market price of risk, or wealth.
///
/// Times are strictly increasing, both vectors have the same length and every
/// value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyInput("path has no points"));
        }
        if times.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(w) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch(format!(
                "times not strictly increasing at index {}",
                w + 1
            )));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("path", "non-finite time or value"));
        }
        Ok(Path { times, values })
    }

    /// Path on the grid `0, 1, ..., values.len() - 1`.
    pub fn indexed(values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|i| i as f64).collect();
        Path::new(times, values)
    }

    pub(crate) fn from_parts_unchecked(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        Path { times, values }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Elapsed time between the first and last point.
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn same_grid(&self, other: &Path) -> bool {
        self.times == other.times
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
