use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::PriceTable;
use super::returns::ReturnsMatrix;
use super::{PipelineError, Result};
use crate::matrix::{inv_wishart_step, returns_draw, wishart_step, ChainSpec, CovMatrix};

/// Synthetic multivariate returns from the covariance hierarchy.
///
/// Level `i` (1 = slowest) is redrawn from its parent every `blocks[i−1]`
/// steps, so Σ_N is piecewise constant and the returns are Gaussian with
/// covariance Σ_N within each block of the fastest level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub chain: ChainSpec,
    pub steps: usize,
    pub blocks: Vec<usize>,
}

/// Default block length of the fastest level.
pub const DEFAULT_FAST_BLOCK: usize = 100;
/// Default ratio between the block lengths of consecutive levels.
pub const DEFAULT_BLOCK_RATIO: usize = 4;

impl SyntheticSpec {
    /// Geometric blocks: the fastest level lasts `fast` steps, each slower
    /// level `ratio` times longer.
    pub fn geometric(chain: ChainSpec, steps: usize, fast: usize, ratio: usize) -> Self {
        let n = chain.levels();
        let blocks = (0..n)
            .map(|i| fast * ratio.pow((n - 1 - i) as u32))
            .collect();
        SyntheticSpec {
            chain,
            steps,
            blocks,
        }
    }

    pub fn new(chain: ChainSpec, steps: usize) -> Self {
        Self::geometric(chain, steps, DEFAULT_FAST_BLOCK, DEFAULT_BLOCK_RATIO)
    }

    fn validate(&self) -> Result<()> {
        if self.blocks.len() != self.chain.levels() || self.blocks.contains(&0) {
            return Err(PipelineError::Parameter(
                "one positive block length per level".into(),
            ));
        }
        if self.steps == 0 {
            return Err(PipelineError::Parameter("steps must be positive".into()));
        }
        Ok(())
    }
}

/// `p × T` returns, deterministic given `seed`.
pub fn synthetic_returns(spec: &SyntheticSpec, seed: u64) -> Result<ReturnsMatrix> {
    spec.validate()?;
    let chain = &spec.chain;
    let p = chain.sigma0.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![Vec::with_capacity(spec.steps); p];
    let mut sigmas: Vec<CovMatrix> = vec![chain.sigma0.clone(); chain.levels()];
    let mut t = 0;
    while t < spec.steps {
        // Redraw every level whose block starts now, top-down.
        let mut redraw = false;
        for (i, &block) in spec.blocks.iter().enumerate() {
            if redraw || t % block == 0 {
                redraw = true;
                let parent = if i == 0 {
                    &chain.sigma0
                } else {
                    &sigmas[i - 1]
                };
                let beta = chain.beta[i];
                sigmas[i] = match chain.model_class {
                    crate::dist::ModelClass::Wishart => wishart_step(parent, beta, &mut rng)?,
                    crate::dist::ModelClass::InverseWishart => {
                        inv_wishart_step(parent, beta, &mut rng)?
                    }
                };
            }
        }
        let fast = *spec.blocks.last().expect("validated");
        let len = (fast - t % fast).min(spec.steps - t);
        for r in returns_draw(sigmas.last().expect("N >= 1"), len, &mut rng) {
            for (row, v) in values.iter_mut().zip(r.iter()) {
                row.push(*v);
            }
        }
        t += len;
    }
    ReturnsMatrix::from_rows(values)
}

/// Turns log returns into a daily price panel starting at 100 on
/// 2000-01-03, with returns scaled by `daily_vol`.
pub fn price_table(returns: &ReturnsMatrix, daily_vol: f64) -> PriceTable {
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let dates = (0..=returns.len() as u64)
        .map(|d| start.checked_add_days(Days::new(d)).expect("date in range"))
        .collect();
    let close = returns
        .values
        .iter()
        .map(|row| {
            let mut m = 100.0f64;
            let mut out = vec![m];
            for r in row {
                m *= (daily_vol * r).exp();
                out.push(m);
            }
            out
        })
        .collect();
    let width = returns.assets().to_string().len();
    PriceTable {
        tickers: (1..=returns.assets())
            .map(|i| format!("A{i:0width$}"))
            .collect(),
        dates,
        close,
        dropped: Vec::new(),
    }
}

impl PriceTable {
    /// Long-format CSV `date,ticker,close`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "ticker", "close"])?;
        for (t, date) in self.dates.iter().enumerate() {
            let d = date.format("%Y-%m-%d").to_string();
            for (ticker, row) in self.tickers.iter().zip(&self.close) {
                w.write_record([d.as_str(), ticker, &format!("{}", row[t])])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ModelClass;
    use crate::pipeline::io::{read_prices, LoadLimits};
    use crate::pipeline::returns::log_returns;

    fn spec() -> SyntheticSpec {
        let chain =
            ChainSpec::new(ModelClass::Wishart, vec![6.0, 6.0], CovMatrix::identity(3)).unwrap();
        SyntheticSpec::geometric(chain, 250, 10, 4)
    }

    #[test]
    fn shape_and_determinism() {
        let s = spec();
        assert_eq!(s.blocks, [40, 10]);
        let a = synthetic_returns(&s, 5).unwrap();
        assert_eq!((a.assets(), a.len()), (3, 250));
        assert_eq!(a, synthetic_returns(&s, 5).unwrap());
    }

    #[test]
    fn prices_round_trip_through_csv() {
        let r = synthetic_returns(&spec(), 1).unwrap();
        let table = price_table(&r, 0.01);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = read_prices(buf.as_slice(), LoadLimits::default()).unwrap();
        assert_eq!(back.tickers, table.tickers);
        let lr = log_returns(&back, 1).unwrap();
        for (x, y) in lr.values[0].iter().zip(&r.values[0]) {
            assert!((x / 0.01 - y).abs() < 1e-9);
        }
    }
}
