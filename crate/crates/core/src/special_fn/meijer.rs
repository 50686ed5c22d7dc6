//! Meijer G-function by numerical inversion of its Mellin transform.
//!
//! For the supported index patterns there are no denominator gamma factors, so
//!
//! ```text
//! M[G; s] = Π_{j≤m} Γ(s + b_j) · Π_{j≤n} Γ(1 − s − a_j)
//! G(x)    = (1/2π) ∫ M[G; c + it] x^{−c−it} dt
//! ```
//!
//! along any vertical line `c` separating the b-poles (left) from the a-poles
//! (right). The integrand is analytic in a strip around the line and decays
//! exponentially in |t|, so the trapezoid rule converges geometrically; the
//! step is halved until two successive sums agree.
//!
//! The default abscissa is the real saddle point of `ln M(c) − c ln x`. There
//! the integrand has a stationary phase and its peak modulus is of the same
//! order as the result, so the quadrature delivers *relative* accuracy even
//! when G is astronomically small. Everything is carried in log space and the
//! logarithm of the result is returned alongside the value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{digamma, ln_gamma, log_gamma_unchecked, trigamma};
use super::SpecialFnError;

const MAX_HALVINGS: usize = 14;
const MAX_WIDTH_DOUBLINGS: u32 = 12;
const UNDERFLOW: f64 = 1e-300;

/// Index lists of one scalar G-function `G^{m,n}_{p,q}(a; b | x)`.
///
/// `b_top` are the m parameters entering as Γ(s + b_j), `a_top` the n
/// parameters entering as Γ(1 − s − a_j). The denominator lists are kept for
/// completeness of the notation but must be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GKernelSpec {
    b_top: Vec<f64>,
    a_top: Vec<f64>,
    b_bottom: Vec<f64>,
    a_bottom: Vec<f64>,
}

impl GKernelSpec {
    pub fn new(
        a_top: Vec<f64>,
        a_bottom: Vec<f64>,
        b_top: Vec<f64>,
        b_bottom: Vec<f64>,
    ) -> Result<Self, SpecialFnError> {
        let spec = GKernelSpec {
            b_top,
            a_top,
            b_bottom,
            a_bottom,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `G^{N,0}_{0,N}(− ; b | x)`, the density kernel of a product of gammas.
    pub fn gamma_product(b: &[f64]) -> Result<Self, SpecialFnError> {
        Self::new(vec![], vec![], b.to_vec(), vec![])
    }

    /// `G^{0,N}_{N,0}(a ; − | x)`.
    pub fn inverse_gamma_product(a: &[f64]) -> Result<Self, SpecialFnError> {
        Self::new(a.to_vec(), vec![], vec![], vec![])
    }

    /// `G^{1,N}_{N,1}(a ; b | x)`.
    pub fn single_b(a: &[f64], b: f64) -> Result<Self, SpecialFnError> {
        Self::new(a.to_vec(), vec![], vec![b], vec![])
    }

    pub fn m(&self) -> usize {
        self.b_top.len()
    }

    pub fn n(&self) -> usize {
        self.a_top.len()
    }

    pub fn p(&self) -> usize {
        self.a_top.len() + self.a_bottom.len()
    }

    pub fn q(&self) -> usize {
        self.b_top.len() + self.b_bottom.len()
    }

    pub fn b_top(&self) -> &[f64] {
        &self.b_top
    }

    pub fn a_top(&self) -> &[f64] {
        &self.a_top
    }

    fn validate(&self) -> Result<(), SpecialFnError> {
        let all = self
            .b_top
            .iter()
            .chain(&self.a_top)
            .chain(&self.b_bottom)
            .chain(&self.a_bottom);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(SpecialFnError::Parameter("non-finite G parameter".into()));
        }
        let (m, n) = (self.m(), self.n());
        let supported = self.b_bottom.is_empty()
            && self.a_bottom.is_empty()
            && ((m >= 1 && n == 0) || (m == 0 && n >= 1) || (m == 1 && n >= 1));
        if !supported {
            return Err(SpecialFnError::Unsupported(format!(
                "G^{{{m},{n}}}_{{{},{}}}",
                self.p(),
                self.q()
            )));
        }
        let (lo, hi) = self.contour_interval();
        if lo >= hi {
            return Err(SpecialFnError::Parameter(format!(
                "no vertical contour separates the poles: need {lo} < c < {hi}"
            )));
        }
        Ok(())
    }

    /// Open interval of admissible contour abscissae.
    pub fn contour_interval(&self) -> (f64, f64) {
        let lo = self
            .b_top
            .iter()
            .map(|b| -b)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .a_top
            .iter()
            .map(|a| 1.0 - a)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    /// Spec of `G(1/x)` as a function of `x`.
    pub fn inverted(&self) -> Self {
        let flip = |v: &[f64]| v.iter().map(|t| 1.0 - t).collect::<Vec<_>>();
        GKernelSpec {
            b_top: flip(&self.a_top),
            a_top: flip(&self.b_top),
            b_bottom: flip(&self.a_bottom),
            a_bottom: flip(&self.b_bottom),
        }
    }

    /// Spec of `x^σ G(x)`.
    pub fn shifted(&self, sigma: f64) -> Self {
        let add = |v: &[f64]| v.iter().map(|t| t + sigma).collect::<Vec<_>>();
        GKernelSpec {
            b_top: add(&self.b_top),
            a_top: add(&self.a_top),
            b_bottom: add(&self.b_bottom),
            a_bottom: add(&self.a_bottom),
        }
    }

    /// ln M[G; s] for complex `s` on an admissible contour.
    pub fn log_mellin(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &b in &self.b_top {
            acc += log_gamma_unchecked(s + b);
        }
        let one_minus_s = Complex64::new(1.0, 0.0) - s;
        for &a in &self.a_top {
            acc += log_gamma_unchecked(one_minus_s - a);
        }
        acc
    }

    fn log_mellin_real(&self, c: f64) -> f64 {
        self.b_top.iter().map(|b| ln_gamma(c + b)).sum::<f64>()
            + self
                .a_top
                .iter()
                .map(|a| ln_gamma(1.0 - c - a))
                .sum::<f64>()
    }

    fn slope(&self, c: f64, ln_x: f64) -> f64 {
        self.b_top.iter().map(|b| digamma(c + b)).sum::<f64>()
            - self.a_top.iter().map(|a| digamma(1.0 - c - a)).sum::<f64>()
            - ln_x
    }

    fn curvature(&self, c: f64) -> f64 {
        self.b_top.iter().map(|b| trigamma(c + b)).sum::<f64>()
            + self
                .a_top
                .iter()
                .map(|a| trigamma(1.0 - c - a))
                .sum::<f64>()
    }

    fn pole_distance(&self, c: f64) -> f64 {
        let (lo, hi) = self.contour_interval();
        (c - lo).min(hi - c)
    }

    /// Real saddle of `ln M(c) − c ln x`; the function is strictly convex on
    /// the admissible interval so the root of its slope is unique.
    pub fn saddle(&self, ln_x: f64) -> f64 {
        let (lo, hi) = self.contour_interval();
        let span = hi - lo;
        let margin = if span.is_finite() {
            1e-6 * span.min(1.0)
        } else {
            1e-6
        };
        let lo_c = lo + margin;
        let hi_c = hi - margin;
        // Bracket [left, right] with slope(left) < 0 < slope(right).
        let (mut left, mut right) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo_c, hi_c),
            (true, false) => {
                let mut r = lo + 1.0;
                let mut step = 1.0;
                while self.slope(r, ln_x) < 0.0 && r < 1e12 {
                    step *= 2.0;
                    r = lo + step;
                }
                (lo_c, r)
            }
            (false, true) => {
                let mut l = hi - 1.0;
                let mut step = 1.0;
                while self.slope(l, ln_x) > 0.0 && l > -1e12 {
                    step *= 2.0;
                    l = hi - step;
                }
                (l, hi_c)
            }
            (false, false) => unreachable!("validated specs have m + n >= 1"),
        };
        if self.slope(left, ln_x) >= 0.0 {
            return left;
        }
        if self.slope(right, ln_x) <= 0.0 {
            return right;
        }
        let mut c = 0.5 * (left + right);
        for _ in 0..200 {
            let g = self.slope(c, ln_x);
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                left = c;
            } else {
                right = c;
            }
            let newton = c - g / self.curvature(c);
            let next = if newton > left && newton < right {
                newton
            } else {
                0.5 * (left + right)
            };
            if (next - c).abs() <= 1e-14 * (1.0 + c.abs()) {
                c = next;
                break;
            }
            c = next;
        }
        c
    }
}

/// Quadrature controls for the contour integral.
///
/// `c = None` selects the saddle-point abscissa. `step` caps the initial
/// trapezoid step, `half_width` is the first truncation of |Im s| (doubled on
/// demand), and `tol` is the relative agreement required between successive
/// step halvings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourParams {
    pub c: Option<f64>,
    pub half_width: f64,
    pub step: f64,
    pub tol: f64,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            c: None,
            half_width: 16.0,
            step: 1.0,
            tol: 1e-10,
        }
    }
}

impl ContourParams {
    pub fn validate(&self) -> Result<(), SpecialFnError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.half_width) && ok(self.step) && ok(self.tol)) {
            return Err(SpecialFnError::Parameter(format!(
                "contour parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Result of one G evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    /// G(x), or 0 when it underflows below 1e-300.
    pub value: f64,
    /// ln G(x); finite even when `value` underflowed.
    pub log_value: f64,
    /// Absolute error estimate from the last step halving.
    pub abs_error: f64,
    pub underflow: bool,
    /// Abscissa actually used.
    pub contour_c: f64,
}

struct Integrand<'a> {
    spec: &'a GKernelSpec,
    c: f64,
    ln_x: f64,
    log_peak: f64,
}

impl Integrand<'_> {
    /// (Re part, modulus) of the integrand at Im s = t, scaled by the peak.
    #[inline]
    fn eval(&self, t: f64) -> (f64, f64) {
        let s = Complex64::new(self.c, t);
        let l = self.spec.log_mellin(s) - s * self.ln_x - self.log_peak;
        let modulus = l.re.exp();
        (modulus * l.im.cos(), modulus)
    }
}

/// Evaluate `G^{m,n}_{p,q}(a; b | x)` for `x > 0`.
pub fn meijer_g(
    spec: &GKernelSpec,
    x: f64,
    contour: &ContourParams,
) -> Result<GValue, SpecialFnError> {
    contour.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpecialFnError::Domain(format!(
            "G argument must be positive, got {x}"
        )));
    }
    let (lo, hi) = spec.contour_interval();
    let ln_x = x.ln();
    let c = match contour.c {
        Some(c) if c > lo && c < hi => c,
        Some(c) => {
            return Err(SpecialFnError::Parameter(format!(
                "contour abscissa {c} outside admissible ({lo}, {hi})"
            )))
        }
        None => spec.saddle(ln_x),
    };
    let log_peak = spec.log_mellin_real(c) - c * ln_x;
    let integrand = Integrand {
        spec,
        c,
        ln_x,
        log_peak,
    };

    let width = 1.0 / spec.curvature(c).sqrt();
    let mut h = contour.step.min(0.5 * spec.pole_distance(c)).min(width);
    // The modulus is non-increasing in |t|; below this cut the tail is negligible.
    let cut = contour.tol * 1e-3;
    let max_half_width = contour.half_width * 2f64.powi(MAX_WIDTH_DOUBLINGS as i32);

    // Sum of f over t = k h for k >= 1, walking outwards until the modulus drops.
    let walk = |start: f64, stride: f64, sum: &mut f64| -> Result<(), f64> {
        let mut limit = contour.half_width;
        let mut t = start;
        loop {
            let (re, modulus) = integrand.eval(t);
            *sum += re;
            if modulus < cut {
                return Ok(());
            }
            t += stride;
            if t > limit {
                limit *= 2.0;
                if limit > max_half_width {
                    return Err(t);
                }
            }
        }
    };

    let to_value = |s: f64| s * log_peak.exp() / std::f64::consts::PI;

    let mut sum = 0.5;
    if let Err(t) = walk(h, h, &mut sum) {
        return Err(SpecialFnError::Accuracy {
            partial: to_value(sum * h),
            half_width: t,
        });
    }
    let mut estimate = sum * h;
    for _ in 0..MAX_HALVINGS {
        let mut odd = 0.0;
        let half = 0.5 * h;
        if let Err(t) = walk(half, h, &mut odd) {
            return Err(SpecialFnError::Accuracy {
                partial: to_value(estimate),
                half_width: t,
            });
        }
        let refined = 0.5 * estimate + half * odd;
        let diff = (refined - estimate).abs();
        h = half;
        estimate = refined;
        if diff <= contour.tol * refined.abs() {
            return Ok(finish(estimate, diff, log_peak, c));
        }
    }
    Err(SpecialFnError::Accuracy {
        partial: to_value(estimate),
        half_width: contour.half_width,
    })
}

fn finish(scaled: f64, scaled_err: f64, log_peak: f64, c: f64) -> GValue {
    let scaled = scaled / std::f64::consts::PI;
    let scaled_err = scaled_err / std::f64::consts::PI;
    let log_value = if scaled > 0.0 {
        log_peak + scaled.ln()
    } else {
        f64::NEG_INFINITY
    };
    let value = if scaled > 0.0 {
        log_value.exp()
    } else {
        scaled * log_peak.exp()
    };
    let underflow = scaled > 0.0 && value < UNDERFLOW;
    GValue {
        value: if underflow { 0.0 } else { value },
        log_value,
        abs_error: scaled_err * log_peak.exp(),
        underflow,
        contour_c: c,
    }
}

/// Limit of G(x) as x → 0⁺.
///
/// Governed by the rightmost b-pole: zero if it sits right of the origin,
/// infinite if left of it or if the pole at the origin is multiple, and the
/// residue otherwise. Kernels without b-poles vanish at the origin.
pub fn meijer_g_at_zero(spec: &GKernelSpec) -> f64 {
    if spec.b_top.is_empty() {
        return 0.0;
    }
    let b_min = spec.b_top.iter().cloned().fold(f64::INFINITY, f64::min);
    if b_min > 0.0 {
        return 0.0;
    }
    if b_min < 0.0 || spec.b_top.iter().filter(|&&b| b == 0.0).count() > 1 {
        return f64::INFINITY;
    }
    let mut log_res = 0.0;
    let mut skipped = false;
    for &b in &spec.b_top {
        if b == 0.0 && !skipped {
            skipped = true;
            continue;
        }
        log_res += ln_gamma(b);
    }
    for &a in &spec.a_top {
        log_res += ln_gamma(1.0 - a);
    }
    log_res.exp()
}
