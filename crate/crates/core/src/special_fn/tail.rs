//! Large-|x| asymptotes of the signal densities.

use serde::{Deserialize, Serialize};

use super::SpecialFnError;
use crate::dist::ModelClass;

/// Leading tail behaviour of `P_N(x)` for one model.
///
/// Gamma class: `|x|^{2θ} exp[−(N+1)(ω x²/2ε₀)^{1/(N+1)}]` with
/// `θ = (Σβ − N)/(N+1)`. Inverse class: `|x|^{−(2 min β + 3)}`; the
/// amplitudes of the individual power laws are not available in closed form,
/// so only the leading exponent is represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptote {
    pub model_class: ModelClass,
    pub levels: usize,
    pub beta: Vec<f64>,
    pub eps0: f64,
    pub theta: f64,
    pub leading_exponent: f64,
}

impl TailAsymptote {
    pub fn new(model_class: ModelClass, beta: &[f64], eps0: f64) -> Result<Self, SpecialFnError> {
        if beta.is_empty() || beta.iter().any(|b| !(*b > 0.0)) || !(eps0 > 0.0) {
            return Err(SpecialFnError::Parameter(
                "tail asymptote needs N >= 1, beta > 0 and eps0 > 0".into(),
            ));
        }
        let n = beta.len() as f64;
        let sum: f64 = beta.iter().sum();
        let theta = (sum - n) / (n + 1.0);
        let min_beta = beta.iter().cloned().fold(f64::INFINITY, f64::min);
        let leading_exponent = match model_class {
            ModelClass::Wishart => 2.0 * theta,
            ModelClass::InverseWishart => 2.0 * min_beta + 3.0,
        };
        Ok(TailAsymptote {
            model_class,
            levels: beta.len(),
            beta: beta.to_vec(),
            eps0,
            theta,
            leading_exponent,
        })
    }

    fn omega(&self) -> f64 {
        self.beta.iter().product()
    }

    /// Coefficient `(N+1)(ω/2ε₀)^{1/(N+1)}` of `(x²)^{1/(N+1)}` in the
    /// gamma-class log-density.
    pub fn stretched_coefficient(&self) -> f64 {
        let m = self.levels as f64 + 1.0;
        m * (self.omega() / (2.0 * self.eps0)).powf(1.0 / m)
    }

    /// Natural log of the (unnormalised) asymptote.
    pub fn ln_value(&self, x: f64) -> Result<f64, SpecialFnError> {
        let ax = x.abs();
        match self.model_class {
            ModelClass::Wishart => {
                let m = self.levels as f64 + 1.0;
                Ok(2.0 * self.theta * ax.ln()
                    - self.stretched_coefficient() * (ax * ax).powf(1.0 / m))
            }
            ModelClass::InverseWishart => {
                if ax == 0.0 {
                    return Err(SpecialFnError::Domain(
                        "power-law asymptote undefined at the origin".into(),
                    ));
                }
                Ok(-self.leading_exponent * ax.ln())
            }
        }
    }
}

/// Tail approximation of `P_N(x)` up to a multiplicative constant.
pub fn tail_asymptote(t: &TailAsymptote, x: f64) -> Result<f64, SpecialFnError> {
    t.ln_value(x).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_level_exponential_tail() {
        let t = TailAsymptote::new(ModelClass::Wishart, &[1.0], 1.0).unwrap();
        assert_eq!(t.theta, 0.0);
        for &x in &[1.0, 3.0, 10.0] {
            let want = -(2.0f64).sqrt() * x;
            assert!((t.ln_value(x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_class_exponent() {
        let t = TailAsymptote::new(ModelClass::InverseWishart, &[2.0, 3.0], 1.0).unwrap();
        assert_eq!(t.leading_exponent, 7.0);
        assert!((tail_asymptote(&t, 2.0).unwrap() - 2f64.powi(-7)).abs() < 1e-15);
        assert!(matches!(
            tail_asymptote(&t, 0.0),
            Err(SpecialFnError::Domain(_))
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TailAsymptote::new(ModelClass::Wishart, &[], 1.0).is_err());
        assert!(TailAsymptote::new(ModelClass::Wishart, &[1.0, -1.0], 1.0).is_err());
    }
}
