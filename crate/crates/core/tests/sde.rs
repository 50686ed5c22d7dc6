use htheory::sde::*;
use htheory::stats::{ks_two_sample, mean};
use htheory::ModelClass;
use statrs::distribution::{ContinuousCDF, Gamma, InverseGamma};

/// One level, parent ε₀, 10⁵ samples spaced 3/γ apart.
fn single_level(gamma: f64, kappa: f64, s: f64, eps0: f64) -> SdeParams {
    let mut p = SdeParams::new(vec![gamma], vec![kappa], s, eps0, 1);
    p.dt = 0.005 / gamma;
    p.record_every = (3.0 / (gamma * p.dt)).round() as usize;
    p.steps = 100_000 * p.record_every;
    p.burn_in = (20.0 / (gamma * p.dt)) as usize;
    p
}

#[test]
fn gamma_stationary_marginal() {
    let p = single_level(1.0, 1.0, 0.5, 1.0);
    let t = simulate_hierarchy(&p, 1).unwrap();
    let ks = stationary_check(&t, 1, 2.0, ModelClass::Wishart, 1.0).unwrap();
    assert!(ks < 0.01, "{ks}");
    assert!((mean(&t.levels[0]) - 1.0).abs() < 0.01);
    // Independent oracle for the conditional CDF itself.
    let g = Gamma::new(2.0, 2.0).unwrap();
    assert!((conditional_cdf(0.8, 2.0, ModelClass::Wishart, 1.0) - g.cdf(0.8)).abs() < 1e-12);
}

#[test]
fn inverse_gamma_stationary_marginal() {
    let p = single_level(1.0, 1.0, 1.0, 1.0);
    let t = simulate_hierarchy(&p, 2).unwrap();
    let ks = stationary_check(&t, 1, 2.0, ModelClass::InverseWishart, 1.0).unwrap();
    assert!(ks < 0.01, "{ks}");
    assert!((mean(&t.levels[0]) - 1.0).abs() < 0.01);
    let ig = InverseGamma::new(3.0, 2.0).unwrap();
    assert!(
        (conditional_cdf(0.8, 2.0, ModelClass::InverseWishart, 1.0) - ig.cdf(0.8)).abs() < 1e-12
    );
}

#[test]
fn every_level_averages_to_eps0() {
    let mut p = SdeParams::geometric(2, 2.0, 5.0, 8.0, 0.5, 2.0, 20_000_000);
    p.dt = 0.002;
    p.record_every = 50;
    let t = simulate_hierarchy(&p, 3).unwrap();
    for (i, level) in t.levels.iter().enumerate() {
        let m = mean(level);
        assert!((m / 2.0 - 1.0).abs() < 0.01, "level {}: {m}", i + 1);
    }
    // Level 2 tracks its parent.
    let diff: Vec<f64> = t.levels[1]
        .iter()
        .zip(&t.levels[0])
        .map(|(b, a)| b - a)
        .collect();
    assert!(mean(&diff).abs() < 0.01 * 2.0);
}

#[test]
fn rescaling_eps0_rescales_paths() {
    let mut base = SdeParams::geometric(3, 1.0, 4.0, 3.0, 0.5, 1.0, 20_000);
    base.dt = 1e-3;
    let lambda = 7.5;
    let mut scaled = base.clone();
    scaled.eps0 = lambda;
    for s in [0.5, 1.0] {
        base.s_exponent = s;
        scaled.s_exponent = s;
        let a = simulate_hierarchy(&base, 4).unwrap();
        let b = simulate_hierarchy(&scaled, 4).unwrap();
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            for (x, y) in la.iter().zip(lb) {
                assert!((y / lambda - x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}

#[test]
fn marginal_depends_on_beta_only() {
    let a = simulate_hierarchy(&single_level(1.0, 1.0, 0.5, 1.0), 5).unwrap();
    let b = simulate_hierarchy(&single_level(2.0, 2f64.sqrt(), 0.5, 1.0), 6).unwrap();
    let sort = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    assert!(ks_two_sample(&sort(&a.levels[0]), &sort(&b.levels[0])) < 0.015);
}

#[test]
fn deterministic_given_seed() {
    let p = SdeParams::geometric(2, 1.0, 10.0, 4.0, 1.0, 1.0, 5_000);
    assert_eq!(
        simulate_hierarchy(&p, 9).unwrap(),
        simulate_hierarchy(&p, 9).unwrap()
    );
    assert_ne!(
        simulate_hierarchy(&p, 9).unwrap(),
        simulate_hierarchy(&p, 10).unwrap()
    );
}
