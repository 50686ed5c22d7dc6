//! Scalar special functions behind the H-theory densities.
//!
//! The centrepiece is [`meijer_g`], a Mellin–Barnes contour evaluator for the
//! handful of Meijer G index patterns the distribution families need. Closed
//! forms ([`bessel`]) and tail asymptotes ([`tail`]) live alongside it and are
//! used as oracles.

pub mod bessel;
pub mod gamma;
pub mod meijer;
pub mod tail;

pub use bessel::{bessel_k, ln_bessel_k};
pub use gamma::{digamma, gamma, ln_gamma, log_gamma_complex, trigamma};
pub use meijer::{meijer_g, meijer_g_at_zero, ContourParams, GKernelSpec, GValue};
pub use tail::{tail_asymptote, TailAsymptote};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("unsupported G-function index pattern: {0}")]
    Unsupported(String),
    #[error("contour integral not converged within |Im s| <= {half_width} (partial estimate {partial:e})")]
    Accuracy { partial: f64, half_width: f64 },
}
