use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::background::BackgroundSeries;
use super::histogram::{kl_divergence, kl_from_masses};
use super::window::OptimalWindow;
use super::{PipelineError, Result};
use crate::dist::{background_log_density, HModel, ModelClass};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Relative KL improvement below which adding levels is not worth it.
pub const FLATTENING_THRESHOLD: f64 = 0.10;

const BETA_MIN: f64 = 0.1;
const BETA_MAX: f64 = 100.0;
const GRID_POINTS: usize = 40;
const BETA_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta_star: f64,
    pub kl: f64,
    pub support_warning: Option<String>,
}

/// KL over the occupied bins only; `None` if the density is not finite there.
fn objective(
    bg: &BackgroundSeries,
    levels: usize,
    class: ModelClass,
    eps0: f64,
    beta: f64,
) -> Option<f64> {
    let model = HModel::common(class, levels, beta, eps0).ok()?;
    let hist = &bg.histogram;
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (i, &m) in hist.masses.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let qi = hist.bin_probability(i, &|e| match background_log_density(&model, e) {
            Ok(l) if l < f64::INFINITY => l.exp(),
            _ => f64::NAN,
        });
        if !qi.is_finite() {
            return None;
        }
        p.push(m);
        q.push(qi);
    }
    Some(kl_from_masses(&p, &q))
}

/// Common-β fit of `f_N` to the background histogram: 40-point log grid on
/// [0.1, 100], then golden-section search to |Δβ| < 1e-3 around the best
/// grid point.
pub fn fit_beta(
    bg: &BackgroundSeries,
    levels: usize,
    class: ModelClass,
    eps0: f64,
) -> Result<BetaFit> {
    if levels == 0 {
        return Err(PipelineError::Parameter("N must be at least 1".into()));
    }
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| BETA_MIN * (BETA_MAX / BETA_MIN).powf(k as f64 / (GRID_POINTS - 1) as f64))
        .collect();
    let values: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&b| objective(bg, levels, class, eps0, b))
        .collect();
    let (best, best_kl) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| {
            PipelineError::FitFailure(format!(
                "density not finite for any β ({class}, N = {levels})"
            ))
        })?;

    let f = |b: f64| objective(bg, levels, class, eps0, b).unwrap_or(f64::INFINITY);
    let (mut a, mut c) = (
        grid[best.saturating_sub(1)],
        grid[(best + 1).min(GRID_POINTS - 1)],
    );
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while c - a > BETA_TOL {
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = f(x2);
        }
    }
    let (mut beta_star, mut kl) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if best_kl < kl {
        beta_star = grid[best];
        kl = best_kl;
    }
    let model = HModel::common(class, levels, beta_star, eps0)?;
    let full = kl_divergence(&bg.histogram, |e| {
        background_log_density(&model, e).map_or(0.0, f64::exp)
    });
    Ok(BetaFit {
        beta_star,
        kl,
        support_warning: full.warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub model_class: ModelClass,
    pub levels: usize,
    pub beta_star: f64,
    pub kl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub model_class: ModelClass,
    pub levels: usize,
    pub beta_star: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub mean: f64,
    pub histogram: Vec<(usize, usize)>,
    pub flat_assets: usize,
    pub no_background_structure: bool,
}

impl From<&OptimalWindow> for WindowSummary {
    fn from(w: &OptimalWindow) -> Self {
        WindowSummary {
            mean: w.mean,
            histogram: w.histogram.clone(),
            flat_assets: w.flat.iter().filter(|&&f| f).count(),
            no_background_structure: w.no_background_structure,
        }
    }
}

/// Versioned result of a model scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub fits: Vec<FitEntry>,
    pub selected: Selection,
    pub flattening_threshold: f64,
    pub eps0_used: f64,
    /// Length of the aggregated return series.
    pub series_length: usize,
    pub background_length: usize,
    pub window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_window: Option<WindowSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_return_kl: Option<f64>,
}

impl FitReport {
    pub fn fits_for(&self, class: ModelClass) -> Vec<&FitEntry> {
        let mut v: Vec<&FitEntry> = self
            .fits
            .iter()
            .filter(|f| f.model_class == class)
            .collect();
        v.sort_by_key(|f| f.levels);
        v
    }

    /// Plain-text table of the scan.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let w = self.fits_for(ModelClass::Wishart);
        let i = self.fits_for(ModelClass::InverseWishart);
        let _ = writeln!(
            s,
            "{:>3}  {:>21}  {:>21}",
            "N", "inverse-Wishart", "Wishart"
        );
        let _ = writeln!(
            s,
            "{:>3}  {:>9}  {:>10}  {:>9}  {:>10}",
            "", "beta", "KL", "beta", "KL"
        );
        let levels: std::collections::BTreeSet<usize> =
            self.fits.iter().map(|f| f.levels).collect();
        let cell = |set: &[&FitEntry], n: usize| {
            set.iter()
                .find(|f| f.levels == n)
                .map_or(format!("{:>9}  {:>10}", "-", "-"), |f| {
                    format!("{:>9.2}  {:>10.4}", f.beta_star, f.kl)
                })
        };
        for n in levels {
            let _ = writeln!(s, "{n:>3}  {}  {}", cell(&i, n), cell(&w, n));
        }
        let sel = &self.selected;
        let _ = writeln!(
            s,
            "\nselected: {} with N = {} (beta = {:.3}, KL = {:.4})",
            sel.model_class, sel.levels, sel.beta_star, sel.kl
        );
        let _ = writeln!(
            s,
            "series length {}, window L = {}, eps0 = {}",
            self.series_length, self.window, self.eps0_used
        );
        if let Some(ow) = &self.optimal_window {
            let _ = writeln!(s, "mean optimal window {:.2}", ow.mean);
            if ow.no_background_structure {
                let _ = writeln!(s, "warning: no background structure detected");
            }
        }
        if let Some(kl) = self.recovered_return_kl {
            let _ = writeln!(s, "recovered return KL {kl:.5}");
        }
        for f in &self.fits {
            if let Some(msg) = &f.support_warning {
                let _ = writeln!(s, "note ({}, N = {}): {msg}", f.model_class, f.levels);
            }
        }
        s
    }
}

/// Picks the class with the lowest KL anywhere, then within it the smallest
/// N whose KL cannot be improved by more than `threshold` (relative) by any
/// larger N.
pub fn select_model(fits: &[FitEntry], threshold: f64) -> Option<Selection> {
    let best = fits.iter().min_by(|a, b| a.kl.total_cmp(&b.kl))?;
    let mut class_fits: Vec<&FitEntry> = fits
        .iter()
        .filter(|f| f.model_class == best.model_class)
        .collect();
    class_fits.sort_by_key(|f| f.levels);
    let chosen = class_fits.iter().enumerate().find_map(|(k, f)| {
        let further = class_fits[k + 1..]
            .iter()
            .map(|g| g.kl)
            .fold(f64::INFINITY, f64::min);
        let gain = if further.is_finite() {
            (f.kl - further) / f.kl
        } else {
            0.0
        };
        (gain < threshold).then_some(*f)
    })?;
    Some(Selection {
        model_class: chosen.model_class,
        levels: chosen.levels,
        beta_star: chosen.beta_star,
        kl: chosen.kl,
    })
}

/// Fits both classes for N = 1..=n_max and selects a model.
pub fn model_scan(bg: &BackgroundSeries, n_max: usize, eps0: f64) -> Result<FitReport> {
    if n_max == 0 {
        return Err(PipelineError::Parameter("N_max must be at least 1".into()));
    }
    let jobs: Vec<(ModelClass, usize)> = ModelClass::ALL
        .iter()
        .flat_map(|&c| (1..=n_max).map(move |n| (c, n)))
        .collect();
    let fits = jobs
        .par_iter()
        .map(|&(class, n)| {
            let fit = fit_beta(bg, n, class, eps0)?;
            log::info!(
                "{class} N={n}: beta = {:.4}, KL = {:.5}",
                fit.beta_star,
                fit.kl
            );
            Ok(FitEntry {
                model_class: class,
                levels: n,
                beta_star: fit.beta_star,
                kl: fit.kl,
                support_warning: fit.support_warning,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let selected = select_model(&fits, FLATTENING_THRESHOLD)
        .ok_or_else(|| PipelineError::FitFailure("no fits to select from".into()))?;
    Ok(FitReport {
        schema_version: REPORT_SCHEMA_VERSION,
        fits,
        selected,
        flattening_threshold: FLATTENING_THRESHOLD,
        eps0_used: eps0,
        series_length: bg.source_len,
        background_length: bg.values.len(),
        window: bg.window,
        optimal_window: None,
        recovered_return_kl: None,
    })
}
