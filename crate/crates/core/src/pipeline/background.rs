use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::{PipelineError, Result};

/// Whitened returns of all assets, concatenated asset-major. Each asset
/// occupies one segment of `segment_len` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedSeries {
    pub values: Vec<f64>,
    pub segment_len: usize,
}

impl AggregatedSeries {
    /// A single-segment series.
    pub fn single(values: Vec<f64>) -> Self {
        let segment_len = values.len();
        AggregatedSeries {
            values,
            segment_len,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.segment_len.max(1))
    }
}

/// Empirical background: moving-window variances and their histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSeries {
    pub window: usize,
    pub step: usize,
    pub values: Vec<f64>,
    pub histogram: Histogram,
    /// Length of the series the windows were taken from.
    pub source_len: usize,
}

impl BackgroundSeries {
    /// Wraps arbitrary positive variances (e.g. model draws) as a background.
    pub fn from_values(values: Vec<f64>, window: usize) -> Result<Self> {
        let histogram = Histogram::background(&values)?;
        let source_len = values.len();
        Ok(BackgroundSeries {
            window,
            step: 1,
            values,
            histogram,
            source_len,
        })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `ε^L(t) = (1/L) Σ_{j<L} [r(t−j) − ⟨r⟩_L]²` for every window ending at
/// `t = L−1, L−1+step, …`.
pub fn windowed_variance(series: &[f64], window: usize, step: usize) -> Result<Vec<f64>> {
    if window < 2 || window > series.len() || step == 0 {
        return Err(PipelineError::Parameter(format!(
            "window {window} (step {step}) invalid for a series of length {}",
            series.len()
        )));
    }
    let l = window as f64;
    Ok(series
        .windows(window)
        .step_by(step)
        .map(|w| {
            let mean = w.iter().sum::<f64>() / l;
            w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / l
        })
        .collect())
}

/// Windowed variances of every segment, concatenated, plus the histogram.
pub fn background_series(
    agg: &AggregatedSeries,
    window: usize,
    step: usize,
) -> Result<BackgroundSeries> {
    let mut values = Vec::with_capacity(agg.len());
    for seg in agg.segments() {
        values.extend(windowed_variance(seg, window, step)?);
    }
    let histogram = Histogram::background(&values)?;
    Ok(BackgroundSeries {
        window,
        step,
        values,
        histogram,
        source_len: agg.len(),
    })
}
