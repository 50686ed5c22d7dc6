//! The univariate volatility hierarchy
//!
//! ```text
//! dεᵢ = −γᵢ(εᵢ − εᵢ₋₁) dt + κᵢ εᵢ^s εᵢ₋₁^{1−s} dWᵢ,   i = 1..N, ε₀ fixed
//! ```
//!
//! integrated with an exponential-Euler step: the linear drift is solved
//! exactly over `dt` with the parent frozen, the noise is an Euler–Maruyama
//! increment. Every operation is homogeneous of degree one, so rescaling ε₀
//! (and the start values) rescales whole paths. Positivity is kept by
//! reflection at a floor proportional to ε₀.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur};
use thiserror::Error;

use crate::dist::ModelClass;
use crate::stats::ks_statistic;

/// Reflection floor relative to ε₀.
pub const FLOOR: f64 = 1e-12;
/// Divergence threshold relative to ε₀.
pub const CEILING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("level {level} diverged at step {step} (value {value:e})")]
    Divergence {
        level: usize,
        step: usize,
        value: f64,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeParams {
    pub gamma: Vec<f64>,
    pub kappa: Vec<f64>,
    /// 0.5 (gamma conditionals) or 1 (inverse-gamma conditionals).
    pub s_exponent: f64,
    pub eps0: f64,
    pub dt: f64,
    /// Recorded steps after burn-in.
    pub steps: usize,
    pub burn_in: usize,
    /// Keep every `record_every`-th step.
    pub record_every: usize,
    /// Start values; ε₀ for every level when empty.
    pub initial: Vec<f64>,
}

impl SdeParams {
    /// Defaults: `dt = 1e-3 / max γ`, burn-in `20 / min γ` in time units.
    pub fn new(gamma: Vec<f64>, kappa: Vec<f64>, s_exponent: f64, eps0: f64, steps: usize) -> Self {
        let gmax = gamma.iter().cloned().fold(0.0, f64::max);
        let gmin = gamma.iter().cloned().fold(f64::INFINITY, f64::min);
        let dt = 1e-3 / gmax;
        let burn_in = (20.0 / (gmin * dt)).ceil() as usize;
        SdeParams {
            gamma,
            kappa,
            s_exponent,
            eps0,
            dt,
            steps,
            burn_in,
            record_every: 1,
            initial: Vec::new(),
        }
    }

    /// Geometric time scales `γᵢ = γ₁ bⁱ⁻¹` and a common β, `κᵢ = √(2γᵢ/β)`.
    pub fn geometric(
        levels: usize,
        gamma1: f64,
        ratio: f64,
        beta: f64,
        s_exponent: f64,
        eps0: f64,
        steps: usize,
    ) -> Self {
        let gamma: Vec<f64> = (0..levels).map(|i| gamma1 * ratio.powi(i as i32)).collect();
        let kappa = gamma.iter().map(|g| (2.0 * g / beta).sqrt()).collect();
        Self::new(gamma, kappa, s_exponent, eps0, steps)
    }

    pub fn levels(&self) -> usize {
        self.gamma.len()
    }

    /// `βᵢ = 2γᵢ/κᵢ²` (infinite for a noise-free level).
    pub fn beta(&self) -> Vec<f64> {
        self.gamma
            .iter()
            .zip(&self.kappa)
            .map(|(g, k)| 2.0 * g / (k * k))
            .collect()
    }

    pub fn model_class(&self) -> ModelClass {
        if self.s_exponent == 1.0 {
            ModelClass::InverseWishart
        } else {
            ModelClass::Wishart
        }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let bad = |m: &str| Err(SdeError::Parameter(m.to_string()));
        let n = self.gamma.len();
        if n == 0 || self.kappa.len() != n {
            return bad("need N >= 1 and one κ per γ");
        }
        if self.gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return bad("γ must be positive");
        }
        if self.kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return bad("κ must be non-negative");
        }
        if self.s_exponent != 0.5 && self.s_exponent != 1.0 {
            return bad("s must be 1/2 or 1");
        }
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            return bad("ε₀ must be positive");
        }
        let gmax = self.gamma.iter().cloned().fold(0.0, f64::max);
        if !(self.dt > 0.0 && self.dt * gmax < 0.1) {
            return Err(SdeError::Parameter(format!(
                "dt·max γ = {} violates the stability guard (< 0.1)",
                self.dt * gmax
            )));
        }
        if self.steps == 0 || self.record_every == 0 {
            return bad("steps and record_every must be positive");
        }
        if !self.initial.is_empty()
            && (self.initial.len() != n || self.initial.iter().any(|v| !(*v > 0.0)))
        {
            return bad("initial values must be positive, one per level");
        }
        Ok(())
    }
}

/// Recorded paths, `levels[i][k]` at time `t_k = k · dt · record_every`
/// counted from the end of burn-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SdeParams,
    pub levels: Vec<Vec<f64>>,
    /// Steps in which any level was reflected at the floor.
    pub reflections: usize,
}

impl Trajectory {
    pub fn sample_dt(&self) -> f64 {
        self.params.dt * self.params.record_every as f64
    }

    /// CSV `t,eps_1,…,eps_N`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.levels.len();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("eps_{i}")));
        w.write_record(&header)?;
        let len = self.levels.first().map_or(0, Vec::len);
        let h = self.sample_dt();
        for k in 0..len {
            let mut row = vec![format!("{}", k as f64 * h)];
            row.extend(self.levels.iter().map(|l| format!("{:e}", l[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates the hierarchy; deterministic given `seed`.
pub fn simulate_hierarchy(params: &SdeParams, seed: u64) -> Result<Trajectory, SdeError> {
    params.validate()?;
    let n = params.levels();
    let eps0 = params.eps0;
    let floor = FLOOR * eps0;
    let ceiling = CEILING * eps0;
    let decay: Vec<f64> = params
        .gamma
        .iter()
        .map(|g| (-g * params.dt).exp())
        .collect();
    let sqrt_dt = params.dt.sqrt();
    let s = params.s_exponent;

    let mut state = if params.initial.is_empty() {
        vec![eps0; n]
    } else {
        params.initial.clone()
    };
    let mut next = state.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let recorded = params.steps / params.record_every;
    let mut levels: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(recorded + 1)).collect();
    let mut reflections = 0usize;
    let total = params.burn_in + params.steps;

    for step in 0..total {
        if step >= params.burn_in && (step - params.burn_in).is_multiple_of(params.record_every) {
            for (l, v) in levels.iter_mut().zip(&state) {
                l.push(*v);
            }
        }
        let mut reflected = false;
        for i in 0..n {
            let parent = if i == 0 { eps0 } else { state[i - 1] };
            let e = state[i];
            let amp = if s == 1.0 { e } else { (e * parent).sqrt() };
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut v = parent + (e - parent) * decay[i] + params.kappa[i] * amp * sqrt_dt * z;
            if v < floor {
                v = (2.0 * floor - v).max(floor);
                reflected = true;
            }
            if !(v <= ceiling) {
                return Err(SdeError::Divergence {
                    level: i + 1,
                    step,
                    value: v,
                });
            }
            next[i] = v;
        }
        if reflected {
            reflections += 1;
        }
        std::mem::swap(&mut state, &mut next);
    }
    if reflections > 0 {
        log::debug!("{reflections} steps reflected at the positivity floor");
    }
    Ok(Trajectory {
        params: params.clone(),
        levels,
        reflections,
    })
}

/// Stationary conditional CDF of one level given its parent.
pub fn conditional_cdf(x: f64, beta: f64, class: ModelClass, eps_prev: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    match class {
        ModelClass::Wishart => gamma_lr(beta, beta * x / eps_prev),
        ModelClass::InverseWishart => gamma_ur(beta + 1.0, beta * eps_prev / x),
    }
}

/// KS distance between the recorded marginal of `level` (1-based) and its
/// analytic conditional, subsampled at spacing `3/γ`. The parent must have
/// been held at `eps_prev`, i.e. `level == 1` with `ε₀ = eps_prev`.
pub fn stationary_check(
    traj: &Trajectory,
    level: usize,
    beta: f64,
    class: ModelClass,
    eps_prev: f64,
) -> Result<f64, SdeError> {
    if level == 0 || level > traj.levels.len() {
        return Err(SdeError::Parameter(format!("no level {level}")));
    }
    let path = &traj.levels[level - 1];
    let gamma = traj.params.gamma[level - 1];
    let h = traj.sample_dt();
    let decorrelation = 3.0 / gamma;
    if (path.len() as f64) * h < 100.0 * decorrelation {
        return Err(SdeError::InsufficientData(format!(
            "trajectory spans {:.3} time units, need {:.3}",
            path.len() as f64 * h,
            100.0 * decorrelation
        )));
    }
    let stride = ((decorrelation / h).round() as usize).max(1);
    let mut sub: Vec<f64> = path.iter().step_by(stride).cloned().collect();
    sub.sort_by(f64::total_cmp);
    Ok(ks_statistic(&sub, |x| {
        conditional_cdf(x, beta, class, eps_prev)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_relaxation() {
        let mut p = SdeParams::new(vec![1.0], vec![0.0], 0.5, 1.0, 50_000);
        p.dt = 1e-4;
        p.burn_in = 0;
        p.initial = vec![3.0];
        let t = simulate_hierarchy(&p, 1).unwrap();
        for (k, v) in t.levels[0].iter().enumerate().step_by(997) {
            let time = k as f64 * p.dt;
            let want = 1.0 + 2.0 * (-time).exp();
            assert!((v - want).abs() < 1e-6, "t={time}: {v} vs {want}");
        }
    }

    #[test]
    fn validation() {
        let mut p = SdeParams::new(vec![1.0], vec![1.0], 0.5, 1.0, 10);
        assert!(p.validate().is_ok());
        p.dt = 0.2;
        assert!(p.validate().is_err());
        let q = SdeParams::new(vec![1.0], vec![1.0], 0.7, 1.0, 10);
        assert!(q.validate().is_err());
    }

    #[test]
    fn short_trajectory_rejected() {
        let mut p = SdeParams::new(vec![1.0], vec![1.0], 0.5, 1.0, 1000);
        p.burn_in = 0;
        let t = simulate_hierarchy(&p, 3).unwrap();
        assert!(matches!(
            stationary_check(&t, 1, 2.0, ModelClass::Wishart, 1.0),
            Err(SdeError::InsufficientData(_))
        ));
    }

    #[test]
    fn divergence_names_level() {
        let mut p = SdeParams::new(vec![1.0, 1.0], vec![0.0, 0.0], 0.5, 1.0, 10);
        p.initial = vec![1.0, 1e13];
        match simulate_hierarchy(&p, 1) {
            Err(SdeError::Divergence { level, .. }) => assert_eq!(level, 2),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let mut p = SdeParams::new(vec![1.0, 10.0], vec![1.0, 1.0], 1.0, 1.0, 4);
        p.burn_in = 0;
        let t = simulate_hierarchy(&p, 1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,eps_1,eps_2\n0,"));
        assert_eq!(text.lines().count(), 5);
    }
}
