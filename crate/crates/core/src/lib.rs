//! Matrix H theory: hierarchical heavy-tailed distribution families built
//! from Meijer G-functions, samplers for the underlying hierarchy, and the
//! pipeline that fits the number of levels and the shape parameter to
//! multivariate return data.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Series coefficients and reference values keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod dist;
pub mod matrix;
pub mod pipeline;
pub mod quad;
pub mod sde;
pub mod special_fn;
pub mod stats;

pub use dist::{DistError, HModel, ModelClass};
