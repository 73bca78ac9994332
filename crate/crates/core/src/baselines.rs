//! Rule-based comparison strategies.
//!
//! Every strategy trades through [`env::execute`], so cash, sizing and fees
//! follow exactly the rules of the RL environment. Signal strategies (random,
//! moving-average crossover, AR forecast, hold) run each asset as its own
//! account with the configured starting capital; index tracking runs one
//! shared account across all assets.

use crate::env::{self, EnvConfig, Fill, PortfolioState, TradeOp, TradeRecord};
use crate::indicators::sma;
use crate::market_data::MarketFrame;
use crate::metrics::{EquityCurve, MetricsError};
use crate::rng::seeded_rng;
use chrono::{Datelike, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("invalid probabilities {0:?}: need non-negative values summing to 1")]
    InvalidProbabilities([f64; 3]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series too short: need {needed} points, found {found}")]
    TooShort { needed: usize, found: usize },
    #[error("singular design matrix over {rows} rows; try a longer fitting window")]
    Singular { rows: usize },
    #[error("empty price frame")]
    EmptyFrame,
    #[error("backtest range {start}..={end} does not fit a frame of {len} rows")]
    BadRange { start: usize, end: usize, len: usize },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub type Result<T, E = BaselineError> = std::result::Result<T, E>;

/// Per-asset decisions at one date.
pub type Signal = Vec<TradeOp>;

/// Draw i.i.d. buy/sell/hold decisions for `assets` assets over `len` days.
///
/// Draws are day-major, so a longer run extends a shorter one. Returned as
/// `[asset][t]`.
pub fn random_signals(probs: [f64; 3], seed: u64, assets: usize, len: usize) -> Result<Vec<Vec<TradeOp>>> {
    let valid = probs.iter().all(|p| p.is_finite() && *p >= 0.0) && (probs.iter().sum::<f64>() - 1.0).abs() < 1e-9;
    if !valid {
        return Err(BaselineError::InvalidProbabilities(probs));
    }
    let mut rng = seeded_rng(seed);
    let mut out = vec![Vec::with_capacity(len); assets];
    for _ in 0..len {
        for series in out.iter_mut() {
            let u: f64 = rng.random();
            let op = if u < probs[0] {
                TradeOp::Buy
            } else if u < probs[0] + probs[1] {
                TradeOp::Sell
            } else {
                TradeOp::Hold
            };
            series.push(op);
        }
    }
    Ok(out)
}

pub const RANDOM_PROBS: [f64; 3] = [0.2, 0.2, 0.6];

/// Price/SMA crossover signals with warmup `period`.
///
/// The close is tracked as sitting above or below its average, starting
/// below. Moving strictly above emits a buy and moving strictly below emits a
/// sell; touching the average keeps the previous side. A series that is above
/// its average from the first defined day therefore buys once on that day.
pub fn ma_crossover(close: &[f64], period: usize) -> Result<Vec<TradeOp>> {
    if period < 2 {
        return Err(BaselineError::InvalidParameter(format!("MA period must be >= 2, got {period}")));
    }
    if close.len() < period + 1 {
        return Err(BaselineError::TooShort {
            needed: period + 1,
            found: close.len(),
        });
    }
    let avg = sma(close, period).map_err(|e| BaselineError::InvalidParameter(e.to_string()))?;
    let mut out = vec![TradeOp::Hold; close.len()];
    let mut above = false;
    for t in period..close.len() {
        if !above && close[t] > avg[t] {
            above = true;
            out[t] = TradeOp::Buy;
        } else if above && close[t] < avg[t] {
            above = false;
            out[t] = TradeOp::Sell;
        }
    }
    Ok(out)
}

/// Rebalance days: the first trading day of January, April, July and October,
/// plus the last trading day of each year and of the calendar.
pub fn rebalance_days(calendar: &[NaiveDate]) -> Vec<bool> {
    let n = calendar.len();
    let mut out = vec![false; n];
    for t in 0..n {
        let d = calendar[t];
        let new_month = t == 0 || calendar[t - 1].month() != d.month() || calendar[t - 1].year() != d.year();
        if new_month && matches!(d.month(), 1 | 4 | 7 | 10) {
            out[t] = true;
        }
        if t + 1 == n || calendar[t + 1].year() != d.year() {
            out[t] = true;
        }
    }
    out
}

/// Equal-weight tracking with a no-trade band around `1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexTracker {
    pub band: f64,
}

impl Default for IndexTracker {
    fn default() -> Self {
        Self { band: 0.02 }
    }
}

impl IndexTracker {
    /// Orders on a rebalance day. With nothing held every asset is bought;
    /// otherwise assets more than `band` under the equal weight of the
    /// invested value are bought and those more than `band` over are sold.
    pub fn decide(&self, portfolio: &PortfolioState, closes: &[f64]) -> Signal {
        let n = closes.len();
        let values: Vec<f64> = portfolio.positions.iter().zip(closes).map(|(q, p)| *q as f64 * p).collect();
        let invested: f64 = values.iter().sum();
        if invested <= 0.0 {
            return vec![TradeOp::Buy; n];
        }
        let target = 1.0 / n as f64;
        values
            .iter()
            .map(|v| {
                let w = v / invested;
                if w < target - self.band {
                    TradeOp::Buy
                } else if w > target + self.band {
                    TradeOp::Sell
                } else {
                    TradeOp::Hold
                }
            })
            .collect()
    }
}

/// AR(p) model of first differences with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    /// `phi[k]` multiplies the difference `k + 1` steps back.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Standard errors of the coefficients followed by the intercept's.
    pub std_errors: Vec<f64>,
    pub residual_variance: f64,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coefficients: vec![0.0; order],
            intercept: 0.0,
            std_errors: vec![0.0; order + 1],
            residual_variance: 0.0,
        }
    }

    /// Next difference given the recent ones, most recent last.
    pub fn predict_delta(&self, recent: &[f64]) -> Result<f64> {
        let p = self.order();
        if recent.len() < p {
            return Err(BaselineError::TooShort {
                needed: p,
                found: recent.len(),
            });
        }
        let lagged = recent.iter().rev().take(p);
        Ok(self.intercept + self.coefficients.iter().zip(lagged).map(|(phi, d)| phi * d).sum::<f64>())
    }

    /// One-step-ahead close from recent closes, most recent last.
    pub fn forecast(&self, closes: &[f64]) -> Result<f64> {
        let p = self.order();
        if closes.len() < p + 1 {
            return Err(BaselineError::TooShort {
                needed: p + 1,
                found: closes.len(),
            });
        }
        let tail = &closes[closes.len() - p - 1..];
        let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(tail[p] + self.predict_delta(&diffs)?)
    }
}

/// Least-squares fit of `d_t` on `(d_{t-1}, .., d_{t-p}, 1)`.
///
/// An all-zero series yields the zero model; any other rank-deficient design
/// is an error.
pub fn fit_ar(diffs: &[f64], p: usize) -> Result<ArModel> {
    if p == 0 {
        return Err(BaselineError::InvalidParameter("AR order must be >= 1".into()));
    }
    if diffs.len() < 10 * p {
        return Err(BaselineError::TooShort {
            needed: 10 * p,
            found: diffs.len(),
        });
    }
    if diffs.iter().all(|d| *d == 0.0) {
        return Ok(ArModel::zero(p));
    }
    let rows = diffs.len() - p;
    let k = p + 1;
    let x = DMatrix::from_fn(rows, k, |r, c| if c < p { diffs[p + r - 1 - c] } else { 1.0 });
    let y = DVector::from_iterator(rows, diffs[p..].iter().copied());

    let svd = x.clone().svd(true, true);
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    if !(smin > smax * 1e-10) {
        return Err(BaselineError::Singular { rows });
    }
    let beta = svd.solve(&y, 0.0).map_err(|_| BaselineError::Singular { rows })?;
    let resid = &y - &x * &beta;
    let dof = rows.saturating_sub(k).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let v_t = svd.v_t.as_ref().ok_or(BaselineError::Singular { rows })?;
    let std_errors = (0..k)
        .map(|j| {
            let diag: f64 = (0..k).map(|m| v_t[(m, j)].powi(2) / s[m].powi(2)).sum();
            (sigma2 * diag).sqrt()
        })
        .collect();
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(BaselineError::Singular { rows });
    }
    Ok(ArModel {
        coefficients: beta.iter().take(p).copied().collect(),
        intercept: beta[p],
        std_errors,
        residual_variance: sigma2,
    })
}

/// Buy above `+threshold` forecast change, sell below `-threshold`.
pub fn arima_signal(model: &ArModel, closes: &[f64], threshold: f64) -> Result<TradeOp> {
    let forecast = model.forecast(closes)?;
    let last = closes[closes.len() - 1];
    Ok(threshold_signal(last, forecast, threshold))
}

pub fn threshold_signal(last: f64, forecast: f64, threshold: f64) -> TradeOp {
    let change = (forecast - last) / last;
    if change > threshold {
        TradeOp::Buy
    } else if change < -threshold {
        TradeOp::Sell
    } else {
        TradeOp::Hold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArimaParams {
    pub order: usize,
    pub threshold: f64,
    /// Trading days between refits.
    pub refit_every: usize,
    /// Trailing closes used for each fit.
    pub window: usize,
}

impl Default for ArimaParams {
    fn default() -> Self {
        Self {
            order: 5,
            threshold: 0.005,
            refit_every: 20,
            window: 504,
        }
    }
}

/// Forecast signals for `t` in `start..=end`, each using closes up to `t`.
///
/// Days before the first successful fit hold. A refit that fails on a
/// degenerate window keeps the previous model.
pub fn arima_signals(close: &[f64], start: usize, end: usize, params: &ArimaParams) -> Result<Vec<TradeOp>> {
    if params.refit_every == 0 || params.window < 2 {
        return Err(BaselineError::InvalidParameter("refit_every must be >= 1 and window >= 2".into()));
    }
    let mut out = vec![TradeOp::Hold; close.len()];
    let mut model: Option<ArModel> = None;
    for t in start..=end.min(close.len().saturating_sub(1)) {
        if (t - start).is_multiple_of(params.refit_every) {
            let from = (t + 1).saturating_sub(params.window);
            let diffs: Vec<f64> = close[from..=t].windows(2).map(|w| w[1] - w[0]).collect();
            match fit_ar(&diffs, params.order) {
                Ok(m) => model = Some(m),
                Err(BaselineError::TooShort { .. } | BaselineError::Singular { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if let Some(m) = &model {
            if t >= params.order {
                out[t] = arima_signal(m, &close[..=t], params.threshold)?;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Random {
        #[serde(default = "default_probs")]
        probs: [f64; 3],
    },
    MaCrossover {
        period: usize,
    },
    IndexTracking {
        #[serde(default)]
        tracker: IndexTracker,
    },
    Arima {
        #[serde(default)]
        params: ArimaParams,
    },
    Hold,
}

fn default_probs() -> [f64; 3] {
    RANDOM_PROBS
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Self::Random { .. } => "Random".into(),
            Self::MaCrossover { period } => format!("{period}-Day MA"),
            Self::IndexTracking { .. } => "Index Tracking".into(),
            Self::Arima { .. } => "ARIMA".into(),
            Self::Hold => "Hold".into(),
        }
    }

    pub fn is_seeded(&self) -> bool {
        matches!(self, Self::Random { .. })
    }

    /// The usual comparison set.
    pub fn standard_set() -> Vec<Strategy> {
        vec![
            Self::Random { probs: RANDOM_PROBS },
            Self::MaCrossover { period: 10 },
            Self::MaCrossover { period: 20 },
            Self::MaCrossover { period: 30 },
            Self::IndexTracking {
                tracker: IndexTracker::default(),
            },
            Self::Arima {
                params: ArimaParams::default(),
            },
        ]
    }
}

/// One account's equity and trades over a backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountRun {
    pub curve: EquityCurve,
    pub trades: Vec<TradeRecord>,
    pub invalid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRun {
    pub strategy: String,
    pub accounts: Vec<AccountRun>,
}

impl BacktestRun {
    pub fn curves(&self) -> Vec<EquityCurve> {
        self.accounts.iter().map(|a| a.curve.clone()).collect()
    }

    /// All trades ordered by time, then account.
    pub fn trades(&self) -> Vec<TradeRecord> {
        let mut all: Vec<TradeRecord> = self.accounts.iter().flat_map(|a| a.trades.iter().cloned()).collect();
        all.sort_by_key(|r| r.t);
        all
    }
}

fn check_range(prices: &MarketFrame, start: usize, end: usize) -> Result<()> {
    if prices.is_empty() || prices.num_assets() == 0 {
        return Err(BaselineError::EmptyFrame);
    }
    if start >= end || end >= prices.len() {
        return Err(BaselineError::BadRange {
            start,
            end,
            len: prices.len(),
        });
    }
    Ok(())
}

/// Step one account from `start` to `end` the way the environment does:
/// orders decided at day `t` fill at that day's close and the account is
/// marked at the next close. The curve holds `end - start + 1` values.
pub fn simulate<F>(prices: &MarketFrame, start: usize, end: usize, config: &EnvConfig, label: &str, mut decide: F) -> Result<AccountRun>
where
    F: FnMut(usize, &PortfolioState, &[f64]) -> Signal,
{
    check_range(prices, start, end)?;
    let mut portfolio = PortfolioState::new(config.initial_capital, prices.num_assets());
    let mut values = vec![portfolio.mark(&prices.closes_at(start))];
    let mut trades = Vec::new();
    let mut invalid = 0;
    for t in start..end {
        let closes = prices.closes_at(t);
        let ops = decide(t, &portfolio, &closes);
        let fill = Fill {
            t,
            date: prices.calendar[t],
            tickers: &prices.tickers,
            closes: &closes,
        };
        let exec = env::execute(&mut portfolio, &ops, &fill, config);
        invalid += exec.invalid;
        trades.extend(exec.trades);
        values.push(portfolio.mark(&prices.closes_at(t + 1)));
    }
    let curve = EquityCurve::new(label, prices.calendar[start..=end].to_vec(), values)?;
    Ok(AccountRun { curve, trades, invalid })
}

/// Run precomputed `[asset][t]` signals with one account per asset.
pub fn run_per_asset(signals: &[Vec<TradeOp>], prices: &MarketFrame, start: usize, end: usize, config: &EnvConfig) -> Result<Vec<AccountRun>> {
    check_range(prices, start, end)?;
    (0..prices.num_assets())
        .map(|i| {
            let single = prices.single(i);
            let ops = &signals[i];
            simulate(&single, start, end, config, &prices.tickers[i], |t, _, _| vec![ops[t]])
        })
        .collect()
}

/// Backtest `strategy` over `start..=end`. History before `start` is
/// available to the signals; nothing after day `t` is used there.
pub fn run_rule_based(strategy: &Strategy, seed: u64, prices: &MarketFrame, start: usize, end: usize, config: &EnvConfig) -> Result<BacktestRun> {
    check_range(prices, start, end)?;
    let n = prices.num_assets();
    let len = prices.len();
    let accounts = match strategy {
        Strategy::IndexTracking { tracker } => {
            let rebalance = rebalance_days(&prices.calendar[start..=end]);
            let run = simulate(prices, start, end, config, "portfolio", |t, p, closes| {
                if rebalance[t - start] {
                    tracker.decide(p, closes)
                } else {
                    vec![TradeOp::Hold; n]
                }
            })?;
            vec![run]
        }
        _ => {
            let signals = match strategy {
                Strategy::Random { probs } => {
                    // draws start at the first backtest day, whatever history precedes it
                    let drawn = random_signals(*probs, seed, n, end - start + 1)?;
                    drawn
                        .into_iter()
                        .map(|s| {
                            let mut full = vec![TradeOp::Hold; start];
                            full.extend(s);
                            full
                        })
                        .collect()
                }
                Strategy::MaCrossover { period } => (0..n)
                    .map(|i| ma_crossover(&closes_of(prices, i), *period))
                    .collect::<Result<Vec<_>>>()?,
                Strategy::Arima { params } => (0..n)
                    .map(|i| arima_signals(&closes_of(prices, i), start, end, params))
                    .collect::<Result<Vec<_>>>()?,
                Strategy::Hold => vec![vec![TradeOp::Hold; len]; n],
                Strategy::IndexTracking { .. } => unreachable!(),
            };
            run_per_asset(&signals, prices, start, end, config)?
        }
    };
    Ok(BacktestRun {
        strategy: strategy.name(),
        accounts,
    })
}

fn closes_of(prices: &MarketFrame, asset: usize) -> Vec<f64> {
    prices.series[asset].closes()
}
