use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::background::AggregatedSeries;
use super::io::PriceTable;
use super::{PipelineError, Result};

/// `p × T` return panel, one row per series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub normalized: bool,
    pub whitened: bool,
}

impl ReturnsMatrix {
    /// Raw (neither normalised nor whitened) panel with generated names.
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self> {
        let t = values.first().map_or(0, Vec::len);
        if values.is_empty() || t == 0 || values.iter().any(|r| r.len() != t) {
            return Err(PipelineError::Parameter(
                "return rows must be non-empty and equal length".into(),
            ));
        }
        let names = (1..=values.len()).map(|i| format!("s{i}")).collect();
        Ok(ReturnsMatrix {
            names,
            values,
            normalized: false,
            whitened: false,
        })
    }

    pub fn assets(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn as_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.assets(), self.len(), |i, t| self.values[i][t])
    }
}

/// `r(t) = ln m(t + Δt) − ln m(t)` per ticker.
pub fn log_returns(prices: &PriceTable, dt_days: usize) -> Result<ReturnsMatrix> {
    let dates = prices.dates.len();
    if dt_days == 0 || dt_days >= dates {
        return Err(PipelineError::Parameter(format!(
            "dt_days must be in 1..{dates}, got {dt_days}"
        )));
    }
    let values = prices
        .close
        .iter()
        .map(|row| {
            (0..dates - dt_days)
                .map(|t| (row[t + dt_days] / row[t]).ln())
                .collect()
        })
        .collect();
    Ok(ReturnsMatrix {
        names: prices.tickers.clone(),
        values,
        normalized: false,
        whitened: false,
    })
}

/// Each row to zero mean and unit population variance.
pub fn normalize(r: &ReturnsMatrix) -> Result<ReturnsMatrix> {
    let mut out = r.clone();
    for (row, name) in out.values.iter_mut().zip(&r.names) {
        let n = row.len() as f64;
        let mean = row.iter().sum::<f64>() / n;
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        if !(var > (1e-12 * scale).powi(2)) || scale == 0.0 {
            return Err(PipelineError::ZeroVariance(name.clone()));
        }
        let sd = var.sqrt();
        row.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    out.normalized = true;
    Ok(out)
}

/// `C = M Mᵀ / T` of a normalised panel.
pub fn correlation(r: &ReturnsMatrix) -> Result<DMatrix<f64>> {
    if !r.normalized {
        return Err(PipelineError::Precondition(
            "correlation needs normalised returns".into(),
        ));
    }
    let m = r.as_matrix();
    let c = &m * m.transpose() / r.len() as f64;
    Ok((&c + c.transpose()) * 0.5)
}

const EIGEN_FLOOR: f64 = 1e-10;

/// `r̃ = Λ^{−½} Uᵀ r` with `C = U Λ Uᵀ`, eigenvalues in descending order and
/// each eigenvector signed so that its largest component is positive.
pub fn rotate_whiten(r: &ReturnsMatrix, c: &DMatrix<f64>) -> Result<ReturnsMatrix> {
    if !r.normalized {
        return Err(PipelineError::Precondition(
            "whitening needs normalised returns".into(),
        ));
    }
    let p = r.assets();
    if c.nrows() != p || c.ncols() != p {
        return Err(PipelineError::Parameter(format!(
            "correlation is {}x{}, returns have {p} rows",
            c.nrows(),
            c.ncols()
        )));
    }
    let eig = c.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut floored = 0;
    let mut w = DMatrix::zeros(p, p);
    for (k, &j) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[j];
        if lambda < EIGEN_FLOOR {
            lambda = EIGEN_FLOOR;
            floored += 1;
        }
        let mut u: DVector<f64> = eig.eigenvectors.column(j).into_owned();
        let lead = u
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            u = -u;
        }
        w.set_row(k, &(u.transpose() / lambda.sqrt()));
    }
    if floored > 0 {
        log::warn!("{floored} correlation eigenvalues floored at {EIGEN_FLOOR:e}");
    }
    if floored > p / 10 {
        return Err(PipelineError::RankDeficient { floored, dim: p });
    }
    let out = w * r.as_matrix();
    Ok(ReturnsMatrix {
        names: (1..=p).map(|k| format!("pc{k}")).collect(),
        values: out
            .row_iter()
            .map(|row| row.iter().cloned().collect())
            .collect(),
        normalized: true,
        whitened: true,
    })
}

/// Concatenates whitened rows, asset-major.
pub fn aggregate(r: &ReturnsMatrix) -> Result<AggregatedSeries> {
    if !r.whitened {
        return Err(PipelineError::Precondition(
            "aggregation needs whitened returns".into(),
        ));
    }
    Ok(AggregatedSeries {
        values: r.values.concat(),
        segment_len: r.len(),
    })
}
