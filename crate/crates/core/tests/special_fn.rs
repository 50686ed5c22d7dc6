use htheory::quad::integrate_half_line;
use htheory::special_fn::*;
use proptest::prelude::*;

fn g(spec: &GKernelSpec, x: f64) -> f64 {
    meijer_g(spec, x, &ContourParams::default()).unwrap().value
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn log_gamma_examples() {
    use num_complex::Complex64;
    let at = |x: f64| log_gamma_complex(Complex64::new(x, 0.0)).unwrap();
    assert_eq!(at(1.0).norm(), 0.0);
    assert!((at(5.0).re - 24f64.ln()).abs() < 1e-13);
    assert!((at(0.5).re - 0.572_364_942_924_700_1).abs() < 1e-14);
    assert!(log_gamma_complex(Complex64::new(-3.0, 0.0)).is_err());
}

#[test]
fn meijer_examples() {
    let e = GKernelSpec::gamma_product(&[0.0]).unwrap();
    assert!(rel(g(&e, 1.0), (-1.0f64).exp()) < 1e-12);
    let k = GKernelSpec::gamma_product(&[0.0, 0.0]).unwrap();
    assert!(rel(g(&k, 1.0), 2.0 * bessel_k(0.0, 2.0).unwrap()) < 1e-10);
    let p = GKernelSpec::single_b(&[-1.0], 0.0).unwrap();
    assert!(rel(g(&p, 0.5), 1.0 / 2.25) < 1e-12);
}

/// ∫₀^∞ x^{s−1} G(x) dx = Π Γ(s + bⱼ).
#[test]
fn mellin_consistency() {
    for b in [vec![0.3], vec![0.0, 1.2], vec![0.5, 0.5, 2.0]] {
        let spec = GKernelSpec::gamma_product(&b).unwrap();
        for s in [1.0, 2.0, 3.0] {
            let f = |x: f64| x.powf(s - 1.0) * g(&spec, x);
            let num = integrate_half_line(&f, 1.0, 1e-9);
            let want: f64 = b.iter().map(|bj| gamma(s + bj)).product();
            assert!(rel(num, want) < 1e-6, "b={b:?} s={s}: {num} vs {want}");
        }
    }
}

/// ∫₀^∞ G¹⁰₀₁(−|b|ξx) G⁰¹₁₀(c|−|ηx) dx = η⁻¹ G²⁰₀₂(−|b, −c|ξ/η).
#[test]
fn convolution_theorem() {
    let (b, c, xi, eta) = (0.7, 1.3, 2.0, 0.5);
    let first = GKernelSpec::gamma_product(&[b]).unwrap();
    let second = GKernelSpec::inverse_gamma_product(&[c]).unwrap();
    let f = |x: f64| g(&first, xi * x) * g(&second, eta * x);
    let num = integrate_half_line(&f, 1.0, 1e-9);
    let joint = GKernelSpec::gamma_product(&[b, -c]).unwrap();
    let want = g(&joint, xi / eta) / eta;
    assert!(rel(num, want) < 1e-5, "{num} vs {want}");
}

#[test]
fn repeated_parameters_stay_accurate() {
    // Coincident poles: ∫ G³⁰₀₃(−|b,b,b|x) dx = Γ(1 + b)³.
    let spec = GKernelSpec::gamma_product(&[2.5, 2.5, 2.5]).unwrap();
    let num = integrate_half_line(&|x: f64| g(&spec, x), 10.0, 1e-10);
    assert!(rel(num, gamma(3.5).powi(3)) < 1e-8);
    let split = GKernelSpec::gamma_product(&[2.5, 2.5 + 1e-7, 2.5]).unwrap();
    assert!(rel(g(&spec, 4.0), g(&split, 4.0)) < 1e-6);
}

#[test]
fn tail_asymptote_examples() {
    let one = TailAsymptote::new(htheory::ModelClass::Wishart, &[1.0], 1.0).unwrap();
    assert_eq!(one.theta, 0.0);
    let l = one.ln_value(3.0).unwrap();
    assert!((l + 2f64.sqrt() * 3.0).abs() < 1e-12);
    let inv = TailAsymptote::new(htheory::ModelClass::InverseWishart, &[2.0, 3.0], 1.0).unwrap();
    assert_eq!(inv.leading_exponent, 7.0);
    assert!(tail_asymptote(&inv, 0.0).is_err());
}

fn gamma_spec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..4.0, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn argument_inversion(b in gamma_spec(), ln_x in -3.0f64..3.0) {
        let spec = GKernelSpec::gamma_product(&b).unwrap();
        let x = ln_x.exp();
        let direct = g(&spec, 1.0 / x);
        let flipped = g(&spec.inverted(), x);
        prop_assert!(rel(flipped, direct) < 1e-8, "{flipped} vs {direct}");
    }

    #[test]
    fn power_absorption(b in gamma_spec(), sigma in -0.15f64..2.0, ln_x in -2.0f64..2.5) {
        let spec = GKernelSpec::gamma_product(&b).unwrap();
        let x = ln_x.exp();
        let lhs = x.powf(sigma) * g(&spec, x);
        let rhs = g(&spec.shifted(sigma), x);
        prop_assert!(rel(rhs, lhs) < 1e-8, "{rhs} vs {lhs}");
    }

    #[test]
    fn inverse_class_kernel_inversion(a in prop::collection::vec(-3.0f64..-0.6, 1..=3), ln_x in -2.0f64..2.0) {
        let spec = GKernelSpec::single_b(&a, 0.0).unwrap();
        let x = ln_x.exp();
        prop_assert!(rel(g(&spec.inverted(), 1.0 / x), g(&spec, x)) < 1e-8);
    }
}
