use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{PipelineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinScale {
    Linear,
    Log,
}

/// Normalised histogram. Values outside the edges are counted in `outside`
/// and excluded from `masses`, which sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub scale: BinScale,
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub counted: usize,
    pub outside: usize,
}

/// Return histograms: 401 bins on [−12, 12].
pub const RETURN_BINS: usize = 401;
pub const RETURN_RANGE: f64 = 12.0;
/// Background histograms: 200 log bins.
pub const BACKGROUND_BINS: usize = 200;

impl Histogram {
    pub fn new(values: &[f64], scale: BinScale, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let ok = bins > 0 && lo < hi && lo.is_finite() && hi.is_finite();
        if !ok || (scale == BinScale::Log && !(lo > 0.0)) {
            return Err(PipelineError::Parameter(format!(
                "bad histogram range [{lo}, {hi}] with {bins} bins"
            )));
        }
        let (a, b) = match scale {
            BinScale::Linear => (lo, hi),
            BinScale::Log => (lo.ln(), hi.ln()),
        };
        let w = (b - a) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|k| {
                let u = if k == bins { b } else { a + k as f64 * w };
                match scale {
                    BinScale::Linear => u,
                    BinScale::Log => u.exp(),
                }
            })
            .collect();
        let mut counts = vec![0usize; bins];
        let mut outside = 0;
        for &v in values {
            let u = match scale {
                BinScale::Linear => v,
                BinScale::Log if v > 0.0 => v.ln(),
                BinScale::Log => f64::NAN,
            };
            if !(u >= a && u <= b) {
                outside += 1;
                continue;
            }
            counts[(((u - a) / w) as usize).min(bins - 1)] += 1;
        }
        let counted = values.len() - outside;
        if counted == 0 {
            return Err(PipelineError::InsufficientData(
                "no values inside histogram range".into(),
            ));
        }
        let masses = counts.iter().map(|&c| c as f64 / counted as f64).collect();
        Ok(Histogram {
            scale,
            edges,
            masses,
            counted,
            outside,
        })
    }

    /// The return histogram used throughout: 401 linear bins on [−12, 12].
    pub fn returns(values: &[f64]) -> Result<Self> {
        Self::new(
            values,
            BinScale::Linear,
            -RETURN_RANGE,
            RETURN_RANGE,
            RETURN_BINS,
        )
    }

    /// 200 log bins from `min(1e-4·mean, min ε)` to `max ε`, each widened by
    /// 0.1%. Zero variances fall outside.
    pub fn background(values: &[f64]) -> Result<Self> {
        let positive: Vec<f64> = values.iter().cloned().filter(|&v| v > 0.0).collect();
        if positive.is_empty() {
            return Err(PipelineError::InsufficientData(
                "no positive variances".into(),
            ));
        }
        let mean = positive.iter().sum::<f64>() / positive.len() as f64;
        let min = positive.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = positive.iter().cloned().fold(0.0, f64::max);
        let lo = (1e-4 * mean).min(min) * 0.999;
        let hi = max * 1.001;
        Self::new(values, BinScale::Log, lo, hi, BACKGROUND_BINS)
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|e| match self.scale {
                BinScale::Linear => 0.5 * (e[0] + e[1]),
                BinScale::Log => (e[0] * e[1]).sqrt(),
            })
            .collect()
    }

    /// Empirical density per bin (mass / width).
    pub fn densities(&self) -> Vec<f64> {
        self.masses
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }

    /// Model probability of bin `i` by 3-point Gauss–Legendre in the bin's
    /// own variable (`ln x` for log bins).
    pub fn bin_probability<F: Fn(f64) -> f64>(&self, i: usize, density: &F) -> f64 {
        const NODES: [(f64, f64); 3] = [
            (-0.774_596_669_241_483_4, 5.0 / 9.0),
            (0.0, 8.0 / 9.0),
            (0.774_596_669_241_483_4, 5.0 / 9.0),
        ];
        let (lo, hi) = (self.edges[i], self.edges[i + 1]);
        match self.scale {
            BinScale::Linear => {
                let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                h * NODES
                    .iter()
                    .map(|(x, w)| w * density(c + h * x))
                    .sum::<f64>()
            }
            BinScale::Log => {
                let (a, b) = (lo.ln(), hi.ln());
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
                h * NODES
                    .iter()
                    .map(|(x, w)| {
                        let v = (c + h * x).exp();
                        w * density(v) * v
                    })
                    .sum::<f64>()
            }
        }
    }
}

/// Outcome of one KL evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    pub kl: f64,
    /// Model probability inside the histogram support.
    pub model_mass: f64,
    pub warning: Option<String>,
}

const Q_FLOOR: f64 = 1e-300;

/// `Σ pᵢ ln(pᵢ/qᵢ)` over bins with `pᵢ > 0`, `qᵢ` floored at 1e-300.
pub fn kl_from_masses(p: &[f64], q: &[f64]) -> f64 {
    let kl: f64 = p
        .iter()
        .zip(q)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, q)| p * (p / q.max(Q_FLOOR)).ln())
        .sum();
    kl.max(0.0)
}

fn finish(hist: &Histogram, q: Vec<f64>) -> KlResult {
    let model_mass: f64 = q.iter().sum();
    let warning = (model_mass < 0.99)
        .then(|| format!("model mass over histogram support is {model_mass:.4} (< 0.99)"));
    KlResult {
        kl: kl_from_masses(&hist.masses, &q),
        model_mass,
        warning,
    }
}

/// `D(empirical ‖ model)` with bin-integrated model probabilities.
pub fn kl_divergence<F: Fn(f64) -> f64>(hist: &Histogram, density: F) -> KlResult {
    let q = (0..hist.bins())
        .map(|i| hist.bin_probability(i, &density))
        .collect();
    finish(hist, q)
}

/// KL against a Gaussian mixture with the given variances, bin masses exact.
pub fn kl_gaussian_mixture(hist: &Histogram, variances: &[f64]) -> KlResult {
    finish(hist, mixture_bin_masses(&hist.edges, variances))
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Bin masses of `(1/M) Σ N(0, εₖ)` on `edges`.
pub fn mixture_bin_masses(edges: &[f64], variances: &[f64]) -> Vec<f64> {
    let mut cdf = vec![0.0; edges.len()];
    for &v in variances {
        let sd = v.max(0.0).sqrt();
        for (c, &e) in cdf.iter_mut().zip(edges) {
            *c += if sd > 0.0 {
                normal_cdf(e / sd)
            } else if e > 0.0 {
                1.0
            } else {
                0.0
            };
        }
    }
    let m = variances.len().max(1) as f64;
    cdf.windows(2).map(|w| (w[1] - w[0]) / m).collect()
}

/// Compresses a sample to at most `k` equal-count group means.
pub fn quantised_nodes(values: &[f64], k: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    if v.len() <= k {
        return v;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (0..k)
        .map(|j| {
            let (a, b) = (j * n / k, (j + 1) * n / k);
            v[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}
