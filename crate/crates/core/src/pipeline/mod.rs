//! From daily closing prices to a fitted hierarchy.
//!
//! prices → log returns → normalised rows → whitened rows (eigenbasis of the
//! correlation matrix, unit variance) → one aggregated series → moving-window
//! variances (the empirical background) → KL fits of `f_N` for each class and
//! N → model selection.

mod background;
mod fit;
mod histogram;
mod io;
mod returns;
mod synth;
mod window;

pub use background::{background_series, windowed_variance, AggregatedSeries, BackgroundSeries};
pub use fit::{
    fit_beta, model_scan, select_model, BetaFit, FitEntry, FitReport, Selection, WindowSummary,
    FLATTENING_THRESHOLD, REPORT_SCHEMA_VERSION,
};
pub use histogram::{
    kl_divergence, kl_from_masses, kl_gaussian_mixture, mixture_bin_masses, quantised_nodes,
    BinScale, Histogram, KlResult,
};
pub use io::{load_prices, read_prices, LoadLimits, PriceTable};
pub use returns::{aggregate, correlation, log_returns, normalize, rotate_whiten, ReturnsMatrix};
pub use synth::{
    price_table, synthetic_returns, SyntheticSpec, DEFAULT_BLOCK_RATIO, DEFAULT_FAST_BLOCK,
};
pub use window::{optimal_window, recovered_return_check, OptimalWindow};

use thiserror::Error;

use crate::dist::DistError;
use crate::matrix::MatrixError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("zero variance in series `{0}`")]
    ZeroVariance(String),
    #[error("correlation matrix is rank deficient: {floored} of {dim} eigenvalues floored")]
    RankDeficient { floored: usize, dim: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fit failed: {0}")]
    FitFailure(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl PipelineError {
    /// Whether the failure stems from the input data rather than numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            PipelineError::Io { .. }
                | PipelineError::Parse { .. }
                | PipelineError::InsufficientData(_)
                | PipelineError::ZeroVariance(_)
                | PipelineError::RankDeficient { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
