//! Multi-asset daily OHLCV data: loading, calendar alignment, cleaning,
//! train/test splitting and z-score normalization.
//!
//! A freshly loaded [`MarketFrame`] is aligned to the union calendar of its
//! assets, with `NaN` marking every field that was absent from the source.
//! [`clean`] turns it into a frame with no missing values.

mod clean;
mod load;
mod normalize;
mod split;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub use clean::clean;
pub use load::load_ohlcv;
pub use normalize::{zscore, NormStats};
pub use split::{index_range, split_by_date, DateIndexed};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{path}: line {line}: {message}")]
    BadRow {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: line {line}: duplicate row for {ticker} on {date}")]
    DuplicateRow {
        path: PathBuf,
        line: u64,
        ticker: String,
        date: NaiveDate,
    },
    #[error("ticker `{0}` not present in source")]
    UnknownTicker(String),
    #[error("date range {start}..={end} selects no rows")]
    EmptyRange { start: NaiveDate, end: NaiveDate },
    #[error("ticker `{0}` has no usable price observations")]
    EntirelyMissing(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("train range ends {train_end}, not before test start {test_start}")]
    OverlappingSplit {
        train_end: NaiveDate,
        test_start: NaiveDate,
    },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("frames are not aligned on the same calendar")]
    Misaligned,
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

/// Inclusive calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }
}

/// One daily candle. Before cleaning, absent fields are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    pub fn missing(date: NaiveDate) -> Self {
        Self {
            date,
            open: f64::NAN,
            high: f64::NAN,
            low: f64::NAN,
            close: f64::NAN,
            volume: f64::NAN,
        }
    }

    /// All four prices present.
    pub fn has_prices(&self) -> bool {
        [self.open, self.high, self.low, self.close]
            .iter()
            .all(|p| p.is_finite())
    }

    pub fn hl2(&self) -> f64 {
        (self.high + self.low) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSeries {
    pub ticker: String,
    pub bars: Vec<Bar>,
}

impl AssetSeries {
    pub fn new(ticker: impl Into<String>, bars: Vec<Bar>) -> Self {
        Self {
            ticker: ticker.into(),
            bars,
        }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }
}

/// N assets on one shared calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketFrame {
    pub tickers: Vec<String>,
    pub calendar: Vec<NaiveDate>,
    pub series: Vec<AssetSeries>,
}

impl MarketFrame {
    /// Build a frame from series that already share a calendar.
    pub fn from_aligned(series: Vec<AssetSeries>) -> Result<Self> {
        let calendar: Vec<NaiveDate> = series
            .first()
            .map(|s| s.bars.iter().map(|b| b.date).collect())
            .unwrap_or_default();
        for s in &series {
            if s.bars.len() != calendar.len()
                || s.bars.iter().zip(&calendar).any(|(b, d)| b.date != *d)
            {
                return Err(DataError::Misaligned);
            }
        }
        Ok(Self {
            tickers: series.iter().map(|s| s.ticker.clone()).collect(),
            calendar,
            series,
        })
    }

    pub fn num_assets(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.calendar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calendar.is_empty()
    }

    pub fn close(&self, asset: usize, t: usize) -> f64 {
        self.series[asset].bars[t].close
    }

    /// Closes of every asset at `t`, in asset order.
    pub fn closes_at(&self, t: usize) -> Vec<f64> {
        self.series.iter().map(|s| s.bars[t].close).collect()
    }

    /// Keep only the named assets, in the given order.
    pub fn select(&self, tickers: &[String]) -> Result<Self> {
        let mut series = Vec::with_capacity(tickers.len());
        for t in tickers {
            let s = self
                .series
                .iter()
                .find(|s| &s.ticker == t)
                .ok_or_else(|| DataError::UnknownTicker(t.clone()))?;
            series.push(s.clone());
        }
        Ok(Self {
            tickers: tickers.to_vec(),
            calendar: self.calendar.clone(),
            series,
        })
    }

    /// Restrict to one asset; the result shares this frame's calendar.
    pub fn single(&self, asset: usize) -> Self {
        Self {
            tickers: vec![self.tickers[asset].clone()],
            calendar: self.calendar.clone(),
            series: vec![self.series[asset].clone()],
        }
    }
}
