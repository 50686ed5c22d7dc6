use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::background::{windowed_variance, AggregatedSeries, BackgroundSeries};
use super::histogram::{kl_from_masses, mixture_bin_masses, quantised_nodes, Histogram};
use super::returns::ReturnsMatrix;
use super::{PipelineError, Result};

/// Mixture nodes kept per candidate window when searching for L.
const WINDOW_NODES: usize = 256;
/// Mixture nodes for the recovered-return check.
const RECOVERY_NODES: usize = 512;

/// Per-asset optimal windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalWindow {
    pub l_range: (usize, usize),
    pub per_asset: Vec<usize>,
    /// KL against L for each asset.
    pub profiles: Vec<Vec<f64>>,
    /// Assets where no window beats a plain Gaussian by more than the KL
    /// sampling noise.
    pub flat: Vec<bool>,
    /// `(L, count)` for every L that was optimal somewhere.
    pub histogram: Vec<(usize, usize)>,
    pub mean: f64,
    /// Set when most assets show a flat profile.
    pub no_background_structure: bool,
}

impl OptimalWindow {
    /// Mean optimal L rounded to the nearest admissible window.
    pub fn chosen_window(&self) -> usize {
        (self.mean.round() as usize).clamp(self.l_range.0, self.l_range.1)
    }
}

/// KL of the return histogram against the Gaussian compound over
/// `variances`, integrating only the occupied span of bins.
fn compound_kl(hist: &Histogram, variances: &[f64], nodes: usize) -> f64 {
    let first = hist.masses.iter().position(|&m| m > 0.0).unwrap_or(0);
    let last = hist.masses.iter().rposition(|&m| m > 0.0).unwrap_or(0);
    let nodes = quantised_nodes(variances, nodes);
    let q = mixture_bin_masses(&hist.edges[first..=last + 1], &nodes);
    kl_from_masses(&hist.masses[first..=last], &q)
}

struct Profile {
    kl: Vec<f64>,
    gaussian: f64,
    noise: f64,
}

fn asset_profile(row: &[f64], windows: &[usize]) -> Result<Profile> {
    let hist = Histogram::returns(row)?;
    let occupied = hist.masses.iter().filter(|&&m| m > 0.0).count();
    // 2T·KL is roughly χ² with k−1 degrees of freedom.
    let noise = (occupied.saturating_sub(1) as f64 / 2.0).sqrt() / hist.counted as f64;
    let var = row.iter().map(|x| x * x).sum::<f64>() / row.len() as f64;
    let kl = windows
        .iter()
        .map(|&l| {
            Ok(compound_kl(
                &hist,
                &windowed_variance(row, l, 1)?,
                WINDOW_NODES,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Profile {
        kl,
        gaussian: compound_kl(&hist, &[var], 1),
        noise,
    })
}

/// For each whitened series, the window L whose variance sample, compounded
/// with a Gaussian, best matches the series' own histogram.
///
/// If no window improves on a single Gaussian by more than the KL noise
/// `√((k−1)/2)/T` (k occupied bins, T points), the profile carries no
/// information about L; such assets are flagged and get the smallest L.
pub fn optimal_window(r: &ReturnsMatrix, l_range: RangeInclusive<usize>) -> Result<OptimalWindow> {
    let (lo, hi) = (*l_range.start(), *l_range.end());
    if l_range.is_empty() {
        return Err(PipelineError::Parameter("empty L range".into()));
    }
    if lo < 2 || hi > r.len() {
        return Err(PipelineError::Parameter(format!(
            "L range {lo}..={hi} invalid for series of length {}",
            r.len()
        )));
    }
    let windows: Vec<usize> = l_range.collect();
    let results = r
        .values
        .par_iter()
        .map(|row| asset_profile(row, &windows))
        .collect::<Result<Vec<_>>>()?;

    let mut per_asset = Vec::with_capacity(results.len());
    let mut flat = Vec::with_capacity(results.len());
    let mut profiles = Vec::with_capacity(results.len());
    for Profile {
        kl: profile,
        gaussian,
        noise,
    } in results
    {
        let min = profile.iter().cloned().fold(f64::INFINITY, f64::min);
        let is_flat = gaussian - min < noise;
        let best = if is_flat {
            0
        } else {
            profile.iter().position(|&v| v == min).unwrap_or(0)
        };
        per_asset.push(windows[best]);
        flat.push(is_flat);
        profiles.push(profile);
    }
    let mut counts = std::collections::BTreeMap::new();
    for &l in &per_asset {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    let mean = per_asset.iter().sum::<usize>() as f64 / per_asset.len() as f64;
    let flat_count = flat.iter().filter(|&&f| f).count();
    Ok(OptimalWindow {
        l_range: (lo, hi),
        per_asset,
        profiles,
        no_background_structure: 2 * flat_count > flat.len(),
        flat,
        histogram: counts.into_iter().collect(),
        mean,
    })
}

/// KL between the aggregated-return histogram and the Gaussian compounded
/// over the empirical background.
pub fn recovered_return_check(agg: &AggregatedSeries, bg: &BackgroundSeries) -> Result<f64> {
    let hist = Histogram::returns(&agg.values)?;
    Ok(compound_kl(&hist, &bg.values, RECOVERY_NODES))
}
