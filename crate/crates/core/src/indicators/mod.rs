//! Trend, volatility and momentum indicators, and assembly of the per-asset
//! feature vectors that make up the agent's observation.
//!
//! Every indicator returns series aligned with its input; the first
//! `warmup` entries are `NaN`. [`build_feature_matrix`] cuts the longest
//! warmup off the front so the resulting [`FeatureFrame`] is fully defined.

mod candles;
mod series;

pub use candles::{atr, heiken_ashi, ichimoku, supertrend, HeikenAshi, Ichimoku, SuperTrend};
pub use series::{bollinger, ema, macd, macd_warmup, rolling_stddev, rsi, sma, Bollinger, Macd};

use crate::market_data::{AssetSeries, Bar, DateIndexed, MarketFrame, NormStats};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, thiserror::Error)]
pub enum IndicatorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series too short: need {needed} rows, have {found}")]
    TooShort { needed: usize, found: usize },
    #[error("empty input")]
    Empty,
    #[error("feature `{0}` not found")]
    UnknownFeature(String),
    #[error(transparent)]
    Data(#[from] crate::market_data::DataError),
}

pub type Result<T, E = IndicatorError> = std::result::Result<T, E>;

pub const OHLCV_COLUMNS: [&str; 5] = ["open", "high", "low", "close", "volume"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Trend,
    Volatility,
    Momentum,
}

/// One configured indicator. Serialized with a `kind` tag so the list can
/// live in the experiment config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndicatorSpec {
    Sma { period: usize },
    Ema { period: usize },
    Stddev { period: usize },
    Atr { period: usize },
    Bollinger { period: usize, k: f64 },
    Rsi { period: usize },
    Macd { fast: usize, slow: usize, signal: usize },
    HeikenAshi,
    Ichimoku { conversion: usize, base: usize, span: usize },
    Supertrend { period: usize, multiplier: f64 },
}

fn fmt_real(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl IndicatorSpec {
    pub fn name(&self) -> String {
        match self {
            Self::Sma { period } => format!("SMA_{period}"),
            Self::Ema { period } => format!("EMA_{period}"),
            Self::Stddev { period } => format!("STDDEV_{period}"),
            Self::Atr { period } => format!("ATR_{period}"),
            Self::Bollinger { period, k } => format!("BBANDS_{period}_{}", fmt_real(*k)),
            Self::Rsi { period } => format!("RSI_{period}"),
            Self::Macd { fast, slow, signal } => format!("macd_{fast}_{slow}_{signal}"),
            Self::HeikenAshi => "HA".to_string(),
            Self::Ichimoku {
                conversion,
                base,
                span,
            } => format!("ICHIMOKU_{conversion}_{base}_{span}"),
            Self::Supertrend { period, multiplier } => {
                format!("SUPERTREND_{period}_{}", fmt_real(*multiplier))
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Sma { .. } | Self::Ema { .. } | Self::HeikenAshi | Self::Ichimoku { .. } => Family::Trend,
            Self::Stddev { .. } | Self::Atr { .. } | Self::Bollinger { .. } => Family::Volatility,
            Self::Rsi { .. } | Self::Macd { .. } | Self::Supertrend { .. } => Family::Momentum,
        }
    }

    /// Leading undefined rows of every column this indicator produces.
    pub fn warmup(&self) -> usize {
        match *self {
            Self::Sma { period }
            | Self::Ema { period }
            | Self::Stddev { period }
            | Self::Bollinger { period, .. } => period.saturating_sub(1),
            Self::Atr { period } | Self::Rsi { period } | Self::Supertrend { period, .. } => period,
            Self::Macd { slow, signal, .. } => slow.saturating_sub(1) + signal.saturating_sub(1),
            Self::HeikenAshi => 0,
            Self::Ichimoku { span, .. } => span.saturating_sub(1),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let n = self.name();
        match self {
            Self::Bollinger { .. } => vec![format!("{n}_mid"), format!("{n}_upper"), format!("{n}_lower")],
            Self::Macd { .. } => vec![n.clone(), format!("{n}_signal"), format!("{n}_hist")],
            Self::HeikenAshi => ["open", "high", "low", "close"].iter().map(|c| format!("HA_{c}")).collect(),
            Self::Ichimoku { .. } => ["tenkan", "kijun", "senkou_a", "senkou_b"]
                .iter()
                .map(|c| format!("{n}_{c}"))
                .collect(),
            Self::Supertrend { .. } => vec![n.clone(), format!("{n}_dir")],
            _ => vec![n],
        }
    }

    /// Evaluate on one asset; one series per entry of [`Self::column_names`].
    pub fn compute(&self, bars: &[Bar]) -> Result<Vec<Vec<f64>>> {
        let close: Vec<f64> = bars.iter().map(|b| b.close).collect();
        Ok(match *self {
            Self::Sma { period } => vec![sma(&close, period)?],
            Self::Ema { period } => vec![ema(&close, period)?],
            Self::Stddev { period } => vec![rolling_stddev(&close, period)?],
            Self::Atr { period } => vec![atr(bars, period)?],
            Self::Bollinger { period, k } => {
                let b = bollinger(&close, period, k)?;
                vec![b.middle, b.upper, b.lower]
            }
            Self::Rsi { period } => vec![rsi(&close, period)?],
            Self::Macd { fast, slow, signal } => {
                let m = macd(&close, fast, slow, signal)?;
                vec![m.line, m.signal, m.histogram]
            }
            Self::HeikenAshi => {
                let h = heiken_ashi(bars)?;
                vec![h.open, h.high, h.low, h.close]
            }
            Self::Ichimoku {
                conversion,
                base,
                span,
            } => {
                let i = ichimoku(bars, conversion, base, span)?;
                vec![i.tenkan, i.kijun, i.senkou_a, i.senkou_b]
            }
            Self::Supertrend { period, multiplier } => {
                let s = supertrend(bars, period, multiplier)?;
                vec![s.line, s.direction]
            }
        })
    }
}

/// SMA_50, EMA_26, ATR_10, RSI_14, STDDEV_20, BBands(20, 2), MACD(12, 26, 9),
/// Heiken Ashi, Ichimoku(9, 26, 52) and SuperTrend(10, 3): 21 columns.
pub fn default_specs() -> Vec<IndicatorSpec> {
    vec![
        IndicatorSpec::Sma { period: 50 },
        IndicatorSpec::Ema { period: 26 },
        IndicatorSpec::Atr { period: 10 },
        IndicatorSpec::Rsi { period: 14 },
        IndicatorSpec::Stddev { period: 20 },
        IndicatorSpec::Bollinger { period: 20, k: 2.0 },
        IndicatorSpec::Macd {
            fast: 12,
            slow: 26,
            signal: 9,
        },
        IndicatorSpec::HeikenAshi,
        IndicatorSpec::Ichimoku {
            conversion: 9,
            base: 26,
            span: 52,
        },
        IndicatorSpec::Supertrend {
            period: 10,
            multiplier: 3.0,
        },
    ]
}

/// Per-time, per-asset feature vectors, stored flat as `T x N x F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub tickers: Vec<String>,
    pub calendar: Vec<NaiveDate>,
    pub feature_names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureFrame {
    pub fn num_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.calendar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calendar.is_empty()
    }

    fn row_width(&self) -> usize {
        self.num_assets() * self.num_features()
    }

    /// All assets' features at `t`, asset-major.
    pub fn row(&self, t: usize) -> &[f64] {
        let w = self.row_width();
        &self.values[t * w..(t + 1) * w]
    }

    pub fn get(&self, t: usize, asset: usize, feature: usize) -> f64 {
        self.values[(t * self.num_assets() + asset) * self.num_features() + feature]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Raw column for one asset.
    pub fn column(&self, asset: usize, feature: usize) -> Vec<f64> {
        (0..self.len()).map(|t| self.get(t, asset, feature)).collect()
    }

    /// Keep the named features, in the given order.
    pub fn select_features(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.feature_index(n).ok_or_else(|| IndicatorError::UnknownFeature(n.clone())))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(self.len() * self.num_assets() * idx.len());
        for t in 0..self.len() {
            for i in 0..self.num_assets() {
                values.extend(idx.iter().map(|&f| self.get(t, i, f)));
            }
        }
        Ok(Self {
            tickers: self.tickers.clone(),
            calendar: self.calendar.clone(),
            feature_names: names.to_vec(),
            values,
        })
    }

    /// Per (asset, feature) statistics over every row of this frame.
    pub fn fit_norm_stats(&self) -> Result<NormStats> {
        Ok(NormStats::fit(&self.values, self.row_width())?)
    }

    pub fn normalized(&self, stats: &NormStats) -> Result<Self> {
        Ok(Self {
            values: crate::market_data::zscore(&self.values, stats)?,
            ..self.clone()
        })
    }

    /// Rebuild the market frame from the leading OHLCV columns.
    pub fn to_market_frame(&self) -> Result<MarketFrame> {
        let idx: Vec<usize> = OHLCV_COLUMNS
            .iter()
            .map(|c| self.feature_index(c).ok_or_else(|| IndicatorError::UnknownFeature((*c).into())))
            .collect::<Result<_>>()?;
        let series = (0..self.num_assets())
            .map(|i| {
                let bars = self
                    .calendar
                    .iter()
                    .enumerate()
                    .map(|(t, d)| Bar {
                        date: *d,
                        open: self.get(t, i, idx[0]),
                        high: self.get(t, i, idx[1]),
                        low: self.get(t, i, idx[2]),
                        close: self.get(t, i, idx[3]),
                        volume: self.get(t, i, idx[4]),
                    })
                    .collect();
                AssetSeries::new(self.tickers[i].clone(), bars)
            })
            .collect();
        Ok(MarketFrame::from_aligned(series)?)
    }
}

impl DateIndexed for FeatureFrame {
    fn calendar(&self) -> &[NaiveDate] {
        &self.calendar
    }

    fn slice_rows(&self, rows: Range<usize>) -> Self {
        let w = self.row_width();
        Self {
            tickers: self.tickers.clone(),
            calendar: self.calendar[rows.clone()].to_vec(),
            feature_names: self.feature_names.clone(),
            values: self.values[rows.start * w..rows.end * w].to_vec(),
        }
    }
}

/// Max warmup over a spec list; the number of rows the builder drops.
pub fn max_warmup(specs: &[IndicatorSpec]) -> usize {
    specs.iter().map(IndicatorSpec::warmup).max().unwrap_or(0)
}

/// Concatenate OHLCV with every indicator column, per asset, and drop the
/// longest warmup prefix.
pub fn build_feature_matrix(frame: &MarketFrame, specs: &[IndicatorSpec]) -> Result<FeatureFrame> {
    let warmup = max_warmup(specs);
    if frame.len() <= warmup {
        return Err(IndicatorError::TooShort {
            needed: warmup + 1,
            found: frame.len(),
        });
    }
    let mut feature_names: Vec<String> = OHLCV_COLUMNS.iter().map(|c| c.to_string()).collect();
    for spec in specs {
        feature_names.extend(spec.column_names());
    }
    let f = feature_names.len();
    let n = frame.num_assets();
    let rows = frame.len() - warmup;

    let mut values = vec![0.0; rows * n * f];
    for (i, series) in frame.series.iter().enumerate() {
        let mut columns: Vec<Vec<f64>> = vec![
            series.bars.iter().map(|b| b.open).collect(),
            series.bars.iter().map(|b| b.high).collect(),
            series.bars.iter().map(|b| b.low).collect(),
            series.bars.iter().map(|b| b.close).collect(),
            series.bars.iter().map(|b| b.volume).collect(),
        ];
        for spec in specs {
            columns.extend(spec.compute(&series.bars)?);
        }
        debug_assert_eq!(columns.len(), f);
        for (k, col) in columns.iter().enumerate() {
            for t in 0..rows {
                let v = col[t + warmup];
                if !v.is_finite() {
                    return Err(IndicatorError::InvalidParameter(format!(
                        "{} produced an undefined value for {} at {}",
                        feature_names[k], series.ticker, frame.calendar[t + warmup]
                    )));
                }
                values[(t * n + i) * f + k] = v;
            }
        }
    }

    Ok(FeatureFrame {
        tickers: frame.tickers.clone(),
        calendar: frame.calendar[warmup..].to_vec(),
        feature_names,
        values,
    })
}
