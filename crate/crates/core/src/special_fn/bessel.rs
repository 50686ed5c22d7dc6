//! Modified Bessel function of the second kind for real order.
//!
//! Evaluated from `K_ν(z) = ∫₀^∞ exp(−z cosh u) cosh(νu) du`. The integrand is
//! even and entire in `u`, so the half-line trapezoid rule is spectrally
//! accurate; the sum is taken around the peak `u* = asinh(|ν|/z)` in log space.

use super::SpecialFnError;

/// ln K_ν(z) for z > 0.
pub fn ln_bessel_k(nu: f64, z: f64) -> Result<f64, SpecialFnError> {
    if !(z > 0.0 && z.is_finite()) || !nu.is_finite() {
        return Err(SpecialFnError::Domain(format!("K_{nu}({z}) needs z > 0")));
    }
    let nu = nu.abs();
    let log_integrand = |u: f64| {
        let y = nu * u;
        -z * u.cosh() + y + (-2.0 * y).exp().ln_1p() - std::f64::consts::LN_2
    };
    let peak_u = (nu / z).asinh();
    let peak = log_integrand(peak_u).max(log_integrand(0.0));
    let width = 1.0 / (nu * nu + z * z).powf(0.25);

    // Sum from `offset` in steps of `stride` until past the peak and negligible.
    let sum_from = |offset: f64, stride: f64| -> f64 {
        let mut s = 0.0;
        let mut u = offset;
        loop {
            let l = log_integrand(u) - peak;
            s += l.exp();
            if u > peak_u && l < -60.0 {
                break;
            }
            u += stride;
        }
        s
    };

    let mut h = width.min(0.5);
    let mut estimate = h * (0.5 * (log_integrand(0.0) - peak).exp() + sum_from(h, h));
    for _ in 0..20 {
        let half = 0.5 * h;
        let odd = sum_from(half, h);
        let refined = 0.5 * estimate + half * odd;
        let done = (refined - estimate).abs() <= 1e-15 * refined;
        estimate = refined;
        h = half;
        if done {
            break;
        }
    }
    Ok(peak + estimate.ln())
}

/// K_ν(z) for z > 0.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64, SpecialFnError> {
    ln_bessel_k(nu, z).map(f64::exp)
}
