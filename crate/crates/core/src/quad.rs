//! Thin quadrature layer over the double-exponential rule of the `quadrature`
//! crate, with the log-variable chunking the densities need.

/// ∫_a^b f, absolute target `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quadrature::integrate(f, a, b, tol).integral
}

const CHUNK: f64 = 2.0;
const MAX_CHUNKS: usize = 400;

/// ∫_lo^hi f(x) dx for 0 < lo < hi, integrated in u = ln x.
pub fn integrate_log<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (ul, uh) = (lo.ln(), hi.ln());
    let pieces = ((uh - ul) / CHUNK).ceil().max(1.0) as usize;
    let w = (uh - ul) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let a = ul + k as f64 * w;
            integrate(
                |u| {
                    let x = u.exp();
                    f(x) * x
                },
                a,
                a + w,
                tol / pieces as f64,
            )
        })
        .sum()
}

/// ∫ of `f(e^u) e^u` over one log chunk, relative target `tol` against
/// `scale` (or against a rough estimate of the chunk itself when `scale` is 0).
fn log_chunk<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, scale: f64) -> f64 {
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let scale = if scale > 0.0 {
        scale
    } else {
        integrate(g, lo, hi, 1e-6).abs()
    };
    integrate(g, lo, hi, tol * 1e-2 * scale.max(1e-300))
}

/// Walks log chunks away from `start` in direction `dir` (±1) until two
/// successive chunks are negligible relative to the running total.
fn walk_out<F: Fn(f64) -> f64>(f: &F, start: f64, dir: f64, tol: f64) -> f64 {
    let mut total: f64 = 0.0;
    let mut edge = start;
    let mut quiet = 0;
    for _ in 0..MAX_CHUNKS {
        let next = edge + dir * CHUNK;
        let (lo, hi) = if dir > 0.0 {
            (edge, next)
        } else {
            (next, edge)
        };
        let piece = log_chunk(f, lo, hi, tol, total.abs());
        total += piece;
        edge = next;
        if piece.abs() <= tol * total.abs() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

/// ∫_0^x f for x > 0, extending leftwards in log chunks until the
/// contributions die out (relative `tol`).
pub fn integrate_to_zero<F: Fn(f64) -> f64>(f: &F, x: f64, tol: f64) -> f64 {
    walk_out(f, x.ln(), -1.0, tol)
}

/// ∫_x^∞ f for x > 0, extending rightwards in log chunks.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: &F, x: f64, tol: f64) -> f64 {
    walk_out(f, x.ln(), 1.0, tol)
}

/// ∫_0^∞ f, split at `center`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: &F, center: f64, tol: f64) -> f64 {
    integrate_to_zero(f, center, tol) + integrate_to_infinity(f, center, tol)
}

/// Cumulative integrals `∫_0^{x_i} f` at sorted positive points.
pub fn cumulative<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let Some(&first) = points.first() else {
        return out;
    };
    let mut acc = integrate_to_zero(f, first, tol);
    out.push(acc);
    for w in points.windows(2) {
        acc += integrate_log(f, w[0], w[1], tol * 1e-3);
        out.push(acc);
    }
    out
}
