use htheory::dist::*;
use htheory::quad::{integrate_half_line, integrate_to_infinity};
use htheory::special_fn::{digamma, trigamma};
use htheory::stats::{ks_bound_on_grid, ks_statistic, mean, quantile_grid};
use htheory::{HModel, ModelClass};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, LogNormal};

fn model(class: ModelClass, beta: &[f64]) -> HModel {
    HModel::new(class, beta.to_vec(), 1.0).unwrap()
}

fn table_model() -> HModel {
    HModel::common(ModelClass::Wishart, 3, 9.67, 1.0).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// ∫ x^k P(x) dx over the real line.
fn signal_integral(m: &HModel, k: i32) -> f64 {
    let f = |x: f64| x.powi(k) * signal_density(m, x).unwrap();
    2.0 * integrate_half_line(&f, 1.0, 1e-10)
}

#[test]
fn background_examples() {
    let exp = model(ModelClass::Wishart, &[1.0]);
    assert!((background_density(&exp, 1e-12).unwrap() - 1.0).abs() < 1e-9);
    let two = model(ModelClass::Wishart, &[2.0]);
    assert!((background_density(&two, 1.0).unwrap() - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
    assert!(background_density(&two, 0.0).is_err());
}

#[test]
fn signal_examples() {
    let inv = model(ModelClass::InverseWishart, &[0.5]);
    assert!((signal_density(&inv, 0.0).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    let w = model(ModelClass::Wishart, &[3.49]);
    let g = signal_density_g(&w, 1.0).unwrap();
    assert!((signal_density(&w, 1.0).unwrap() - g).abs() < 1e-8 * g);
}

#[test]
fn normalisation_and_moments() {
    let cases = [
        (ModelClass::Wishart, vec![1.5]),
        (ModelClass::Wishart, vec![2.0, 3.0]),
        (ModelClass::Wishart, vec![4.0, 4.0, 4.0]),
        (ModelClass::Wishart, vec![2.5, 3.0, 5.0, 8.0]),
        (ModelClass::InverseWishart, vec![3.5]),
        (ModelClass::InverseWishart, vec![4.0, 5.0]),
        (ModelClass::InverseWishart, vec![5.0, 5.0, 6.0]),
        (ModelClass::InverseWishart, vec![6.0, 6.0, 6.0, 6.0]),
    ];
    for (class, beta) in cases {
        let m = model(class, &beta);
        let bg = integrate_half_line(&|e: f64| background_density(&m, e).unwrap(), 1.0, 1e-10);
        assert!((bg - 1.0).abs() < 1e-6, "{class} {beta:?}: ∫f = {bg}");
        let norm = signal_integral(&m, 0);
        assert!((norm - 1.0).abs() < 1e-6, "{class} {beta:?}: ∫P = {norm}");
        let second = signal_integral(&m, 2);
        assert!(
            (second - 1.0).abs() < 1e-6,
            "{class} {beta:?}: E[x²] = {second}"
        );
        let fourth = signal_integral(&m, 4);
        let want = 3.0 * background_moment(&m, 2);
        assert!(
            (fourth - want).abs() < 1e-5 * want,
            "{class} {beta:?}: E[x⁴] = {fourth} vs {want}"
        );
    }
}

#[test]
fn moment_examples() {
    for class in ModelClass::ALL {
        assert!((background_moment(&model(class, &[2.0, 3.0]), 1) - 1.0).abs() < 1e-14);
    }
    assert!((background_moment(&model(ModelClass::Wishart, &[2.0, 3.0]), 2) - 2.0).abs() < 1e-13);
    assert!(
        (background_moment(&model(ModelClass::InverseWishart, &[2.0, 3.0]), 2) - 3.0).abs() < 1e-13
    );
    assert!(background_moment(&model(ModelClass::InverseWishart, &[2.0, 3.0]), 3).is_infinite());
}

#[test]
fn sampler_examples() {
    let exp = model(ModelClass::Wishart, &[1.0]);
    assert!((mean(&sample_background(&exp, 1_000_000, 1)) - 1.0).abs() < 0.003);

    let t = table_model();
    let s = sample_background(&t, 1_000_000, 2);
    let m2 = s.iter().map(|e| e * e).sum::<f64>() / s.len() as f64;
    assert!((m2 / background_moment(&t, 2) - 1.0).abs() < 0.01);

    let inv = model(ModelClass::InverseWishart, &[2.0, 3.0]);
    let s = sample_background(&inv, 1_000_000, 3);
    let frac = s.iter().filter(|&&e| e > 10.0).count() as f64 / s.len() as f64;
    let tail = integrate_to_infinity(&|e: f64| background_density(&inv, e).unwrap(), 10.0, 1e-10);
    let se = (tail * (1.0 - tail) / s.len() as f64).sqrt();
    assert!((frac - tail).abs() < 4.0 * se, "{frac} vs {tail}");
}

#[test]
fn signal_sampler_moments() {
    let exp = model(ModelClass::Wishart, &[1.0]);
    let x = sample_signal(&exp, 1_000_000, 4);
    let n = x.len() as f64;
    let m = mean(&x);
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n;
    assert!(m.abs() < 3.0 * (m2 / n).sqrt());
    assert!((m2 - 1.0).abs() < 0.01);
    // Excess kurtosis 3; its sampling error is large (8th moment = 105·24).
    assert!((m4 / (m2 * m2) - 3.0 - 3.0).abs() < 0.3);
}

#[test]
fn table_model_monte_carlo_cdfs() {
    let t = table_model();
    let bg = sorted(sample_background(&t, 1_000_000, 5));
    let grid = quantile_grid(&bg, 800);
    let cdf = background_cdf(&t, &grid).unwrap();
    assert!(ks_bound_on_grid(&bg, &grid, &cdf) < 0.005);

    let x = sorted(sample_signal(&t, 1_000_000, 6));
    let grid = quantile_grid(&x, 800);
    let cdf = signal_cdf(&t, &grid).unwrap();
    assert!(ks_bound_on_grid(&x, &grid, &cdf) < 0.005);
}

#[test]
fn inverse_class_matches_product_of_inverse_gammas() {
    let m = model(ModelClass::InverseWishart, &[2.74, 4.0]);
    let s = sorted(sample_background(&m, 1_000_000, 7));
    let grid = quantile_grid(&s, 800);
    let cdf = background_cdf(&m, &grid).unwrap();
    assert!(ks_bound_on_grid(&s, &grid, &cdf) < 0.005);
}

#[test]
fn lognormal_limit_examples() {
    let (l, s) = lognormal_limit(&model(ModelClass::Wishart, &[1.0]));
    assert!((l - digamma(1.0)).abs() < 1e-14);
    assert!((s * s - trigamma(1.0)).abs() < 1e-14);
    let (_, s) = lognormal_limit(&model(ModelClass::Wishart, &[1e8]));
    assert!(s < 1e-3);
    for class in ModelClass::ALL {
        let m = HModel::common(class, 15, 30.0, 1.0).unwrap();
        let (lambda, sigma) = lognormal_limit(&m);
        let ln = LogNormal::new(lambda, sigma).unwrap();
        let grid: Vec<f64> = (1..400)
            .map(|k| (lambda + sigma * (k as f64 / 50.0 - 4.0)).exp())
            .collect();
        let f = background_cdf(&m, &grid).unwrap();
        let ks = grid
            .iter()
            .zip(&f)
            .map(|(x, f)| (f - ln.cdf(*x)).abs())
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "{class}: {ks}");
    }
}

#[test]
fn sampled_lognormal_limit() {
    let m = HModel::common(ModelClass::Wishart, 15, 30.0, 1.0).unwrap();
    let (lambda, sigma) = lognormal_limit(&m);
    let ln = LogNormal::new(lambda, sigma).unwrap();
    let s = sorted(sample_background(&m, 200_000, 8));
    assert!(ks_statistic(&s, |x| ln.cdf(x)) < 0.02);
}

#[test]
fn density_curves() {
    let m = table_model();
    let grid: Vec<f64> = (0..=200).map(|k| (k as f64 - 100.0) / 10.0).collect();
    let c = DensityCurve::signal(&m, &grid).unwrap();
    assert_eq!(c.len(), 201);
    for k in 0..=100 {
        assert_eq!(c.values[k], c.values[200 - k]);
    }
    assert!(DensityCurve::signal(&m, &[1.0, 0.5]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn signal_is_even(
        inverse in any::<bool>(),
        beta in prop::collection::vec(0.6f64..12.0, 1..=3),
        x in 0.0f64..15.0,
    ) {
        let class = if inverse { ModelClass::InverseWishart } else { ModelClass::Wishart };
        let m = HModel::new(class, beta, 1.3).unwrap();
        prop_assert_eq!(signal_density(&m, x).unwrap(), signal_density(&m, -x).unwrap());
    }

    #[test]
    fn one_level_fast_path_matches_kernel(
        inverse in any::<bool>(),
        beta in 0.6f64..20.0,
        x in -10.0f64..10.0,
    ) {
        let class = if inverse { ModelClass::InverseWishart } else { ModelClass::Wishart };
        let m = HModel::new(class, vec![beta], 1.0).unwrap();
        let fast = signal_density(&m, x).unwrap();
        let g = signal_density_g(&m, x).unwrap();
        prop_assert!((fast - g).abs() <= 1e-8 * g, "{fast} vs {g}");
    }

    #[test]
    fn background_scales_with_eps0(
        inverse in any::<bool>(),
        beta in prop::collection::vec(0.8f64..10.0, 1..=3),
        eps in 0.05f64..5.0,
        eps0 in 0.1f64..10.0,
    ) {
        // f(ε; ε₀) = f(ε/ε₀; 1)/ε₀
        let class = if inverse { ModelClass::InverseWishart } else { ModelClass::Wishart };
        let unit = HModel::new(class, beta, 1.0).unwrap();
        let scaled = unit.with_eps0(eps0).unwrap();
        let a = background_log_density(&scaled, eps * eps0).unwrap();
        let b = background_log_density(&unit, eps).unwrap() - eps0.ln();
        prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn samples_are_deterministic(seed in any::<u64>()) {
        let m = table_model();
        prop_assert_eq!(sample_signal(&m, 16, seed), sample_signal(&m, 16, seed));
    }
}
