//! Kolmogorov–Smirnov distances and small empirical helpers.

/// Fraction of `sorted` that is `<= x`.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

fn ecdf_strict(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v < x) as f64 / sorted.len() as f64
}

/// One-sample KS statistic against a CDF evaluated at every sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Upper bound on the one-sample KS statistic when the model CDF is only
/// known on a sorted grid. Exact up to the CDF increment across grid cells.
pub fn ks_bound_on_grid(sorted: &[f64], grid: &[f64], cdf_at_grid: &[f64]) -> f64 {
    assert_eq!(grid.len(), cdf_at_grid.len());
    let mut worst: f64 = 0.0;
    if grid.is_empty() {
        return 1.0;
    }
    // (-inf, g0]
    worst = worst.max(ecdf(sorted, grid[0])).max(cdf_at_grid[0]);
    for i in 0..grid.len() - 1 {
        let (lo, hi) = (grid[i], grid[i + 1]);
        let above = ecdf_strict(sorted, hi) - cdf_at_grid[i];
        let below = cdf_at_grid[i + 1] - ecdf(sorted, lo);
        worst = worst.max(above).max(below);
    }
    let last = grid.len() - 1;
    worst = worst
        .max(1.0 - ecdf(sorted, grid[last]))
        .max(1.0 - cdf_at_grid[last]);
    worst
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Evenly spaced empirical quantiles of sorted data, deduplicated.
pub fn quantile_grid(sorted: &[f64], count: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut grid: Vec<f64> = (0..count)
        .map(|k| sorted[((k as f64 + 0.5) / count as f64 * n as f64) as usize % n])
        .collect();
    grid.dedup();
    grid
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
