//! Gamma-family functions: complex log-gamma on the principal branch and the
//! real digamma / trigamma used for saddle points and log-moments.
//!
//! The complex log-gamma follows the classic split into a Stirling series for
//! large |z|, a Taylor expansion around z = 1, upward recurrence for the
//! remaining right half-plane and reflection for Re(z) < 0.1. The branch
//! bookkeeping matches the analytic continuation of ln Γ from the positive
//! real axis, which is what scipy and mpmath return.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::SpecialFnError;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const TWO_PI: f64 = 2.0 * PI;
const STIRLING_X: f64 = 7.0;
const STIRLING_Y: f64 = 7.0;
const TAYLOR_RADIUS: f64 = 0.2;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// B_{2k} / (2k (2k - 1)) for k = 8 down to 1 (Horner order in 1/z^2).
const STIRLING_COEFFS: [f64; 8] = [
    -2.955_065_359_477_124_2e-2,
    6.410_256_410_256_410_3e-3,
    -1.917_526_917_526_917_5e-3,
    8.417_508_417_508_417_5e-4,
    -5.952_380_952_380_952_4e-4,
    7.936_507_936_507_936_5e-4,
    -2.777_777_777_777_777_8e-3,
    8.333_333_333_333_333_3e-2,
];

// zeta(k) for k = 2..=27; ln Γ(1 + w) = -γ w + Σ (-1)^k ζ(k) w^k / k.
const ZETA: [f64; 26] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
];

/// Principal-branch ln Γ(z).
///
/// Returns a domain error at the poles z = 0, -1, -2, ...
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64, SpecialFnError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecialFnError::Domain(format!(
            "log_gamma of non-finite {z}"
        )));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(SpecialFnError::Domain(format!(
            "log_gamma pole at {}",
            z.re
        )));
    }
    Ok(log_gamma_unchecked(z))
}

/// ln Γ(z) without the pole check; used in hot loops where the caller keeps
/// the argument off the negative real axis.
#[inline]
pub(crate) fn log_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re > STIRLING_X || z.im.abs() > STIRLING_Y {
        stirling(z)
    } else if (z - 1.0).norm() <= TAYLOR_RADIUS {
        taylor_at_one(z - 1.0)
    } else if (z - 2.0).norm() <= TAYLOR_RADIUS {
        (z - 1.0).ln() + taylor_at_one(z - 2.0)
    } else if z.re < 0.1 {
        reflection(z)
    } else if !z.im.is_sign_negative() {
        recurrence(z)
    } else {
        recurrence(z.conj()).conj()
    }
}

fn stirling(z: Complex64) -> Complex64 {
    let rz = z.inv();
    let rzz = rz / z;
    let mut poly = Complex64::new(STIRLING_COEFFS[0], 0.0);
    for &c in &STIRLING_COEFFS[1..] {
        poly = poly * rzz + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + rz * poly
}

fn taylor_at_one(w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, &zeta) in ZETA.iter().enumerate().rev() {
        let k = (idx + 2) as f64;
        let sign = if (idx + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * w + sign * zeta / k;
    }
    w * (acc * w - EULER_GAMMA)
}

// Shift right until Stirling applies; count how often the running product
// crosses the negative real axis so the summed logs stay on one branch.
fn recurrence(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut signflips = 0i32;
    let mut sb = false;
    let mut shiftprod = z;
    z.re += 1.0;
    while z.re <= STIRLING_X {
        shiftprod *= z;
        let nsb = shiftprod.im.is_sign_negative();
        if nsb && !sb {
            signflips += 1;
        }
        sb = nsb;
        z.re += 1.0;
    }
    stirling(z) - shiftprod.ln() - Complex64::new(0.0, signflips as f64 * TWO_PI)
}

fn reflection(z: Complex64) -> Complex64 {
    let sign = if z.im.is_sign_negative() { -1.0 } else { 1.0 };
    let branch = sign * TWO_PI * (0.5 * z.re + 0.25).floor();
    Complex64::new(LN_PI, branch)
        - sin_pi(z).ln()
        - log_gamma_unchecked(Complex64::new(1.0, 0.0) - z)
}

fn sin_pi(z: Complex64) -> Complex64 {
    // sin(pi z) with the real part reduced exactly.
    let x = z.re;
    let y = z.im * PI;
    let r = x - 2.0 * (0.5 * x).floor();
    let (s, c) = match r {
        0.5 => (1.0, 0.0),
        1.5 => (-1.0, 0.0),
        r if r == 0.0 || r == 1.0 => (0.0, if r == 0.0 { 1.0 } else { -1.0 }),
        r => ((PI * r).sin(), (PI * r).cos()),
    };
    Complex64::new(s * y.cosh(), c * y.sinh())
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    log_gamma_unchecked(Complex64::new(x, 0.0)).re
}

/// Γ(x) for real x > 0 (overflows to +inf past x ≈ 171.6).
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Digamma ψ(x) for real x not a non-positive integer.
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        if x == x.floor() {
            return f64::NAN;
        }
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 16.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    // B_2k / (2k) series.
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 / x - series
}

/// Trigamma ψ'(x) for real x > 0.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 16.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))));
    acc + series
}
