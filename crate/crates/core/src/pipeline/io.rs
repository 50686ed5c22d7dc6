use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};

/// Complete panel of closing prices, `close[i][t]` for ticker `i` on
/// `dates[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub close: Vec<Vec<f64>>,
    /// Tickers removed because they lacked a quote on some date.
    pub dropped: Vec<String>,
}

impl PriceTable {
    pub fn assets(&self) -> usize {
        self.tickers.len()
    }
}

/// Minimum panel size accepted after cleaning.
#[derive(Debug, Clone, Copy)]
pub struct LoadLimits {
    pub min_assets: usize,
    pub min_dates: usize,
}

impl Default for LoadLimits {
    fn default() -> Self {
        LoadLimits {
            min_assets: 2,
            min_dates: 10,
        }
    }
}

/// Reads a long-format `date,ticker,close` CSV file.
pub fn load_prices(path: &Path) -> Result<PriceTable> {
    let file = File::open(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_prices(file, LoadLimits::default())
}

/// Parses long-format prices from any reader. The date set is the union over
/// all rows; tickers missing any of those dates are dropped.
pub fn read_prices<R: Read>(input: R, limits: LoadLimits) -> Result<PriceTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header_err = |m: String| PipelineError::Parse {
        line: 1,
        message: m,
    };
    let headers = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                header_err(format!(
                    "missing `{name}` column, expected date,ticker,close"
                ))
            })
    };
    let (ic, it, ip) = (col("date")?, col("ticker")?, col("close")?);

    let mut series: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut all_dates = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| PipelineError::Parse { line, message };
        let field = |i: usize| record.get(i).ok_or_else(|| bad("missing field".into()));
        let date = NaiveDate::parse_from_str(field(ic)?, "%Y-%m-%d")
            .map_err(|e| bad(format!("bad date `{}`: {e}", field(ic).unwrap_or(""))))?;
        let ticker = field(it)?.to_string();
        if ticker.is_empty() {
            return Err(bad("empty ticker".into()));
        }
        let raw = field(ip)?;
        let close: f64 = raw.parse().map_err(|_| bad(format!("bad price `{raw}`")))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(bad(format!("price must be positive, got {close}")));
        }
        if series
            .entry(ticker.clone())
            .or_default()
            .insert(date, close)
            .is_some()
        {
            return Err(bad(format!("duplicate quote for {ticker} on {date}")));
        }
        all_dates.insert(date);
    }

    let dates: Vec<NaiveDate> = all_dates.into_iter().collect();
    let mut tickers = Vec::new();
    let mut close = Vec::new();
    let mut dropped = Vec::new();
    for (ticker, quotes) in series {
        if quotes.len() == dates.len() {
            close.push(quotes.into_values().collect());
            tickers.push(ticker);
        } else {
            dropped.push(ticker);
        }
    }
    if !dropped.is_empty() {
        log::warn!("dropped incomplete tickers: {}", dropped.join(", "));
    }
    if tickers.len() < limits.min_assets || dates.len() < limits.min_dates {
        return Err(PipelineError::InsufficientData(format!(
            "{} complete assets and {} dates after cleaning (need {} and {})",
            tickers.len(),
            dates.len(),
            limits.min_assets,
            limits.min_dates
        )));
    }
    Ok(PriceTable {
        tickers,
        dates,
        close,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: LoadLimits = LoadLimits {
        min_assets: 2,
        min_dates: 3,
    };

    #[test]
    fn complete_panel() {
        let csv = "date,ticker,close\n2020-01-02,B,10\n2020-01-01,A,1\n2020-01-01,B,11\n\
                   2020-01-02,A,2\n2020-01-03,A,3\n2020-01-03,B,12\n";
        let t = read_prices(csv.as_bytes(), SMALL).unwrap();
        assert_eq!(t.tickers, ["A", "B"]);
        assert_eq!(t.close, vec![vec![1.0, 2.0, 3.0], vec![11.0, 10.0, 12.0]]);
        assert!(t.dates.windows(2).all(|w| w[0] < w[1]));
        assert!(read_prices(csv.as_bytes(), LoadLimits::default()).is_err());
    }

    #[test]
    fn incomplete_ticker_dropped() {
        let csv = "date,ticker,close\n2020-01-01,A,1\n2020-01-02,A,2\n2020-01-03,A,3\n\
                   2020-01-01,B,1\n2020-01-02,B,2\n2020-01-03,B,3\n2020-01-01,C,5\n";
        let t = read_prices(csv.as_bytes(), SMALL).unwrap();
        assert_eq!(t.tickers, ["A", "B"]);
        assert_eq!(t.dropped, ["C"]);
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let csv = "date,ticker,close\n2020-01-01,A,1\n2020-01-02,A,-2\n";
        match read_prices(csv.as_bytes(), SMALL) {
            Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let csv = "date,ticker,close\n2020-13-01,A,1\n";
        assert!(matches!(
            read_prices(csv.as_bytes(), SMALL),
            Err(PipelineError::Parse { line: 2, .. })
        ));
        assert!(read_prices("when,who,price\n".as_bytes(), SMALL).is_err());
    }
}
