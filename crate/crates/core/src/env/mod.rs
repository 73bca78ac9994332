//! The multi-asset trading MDP.
//!
//! The agent observes a `W x N x F` window of normalized features plus its
//! portfolio status, picks one of `2^N` joint actions (bit `i` set = buy
//! asset `i`, clear = sell it), trades at the day's close and is rewarded
//! with the next day's equity change.

mod accounting;

pub use accounting::{execute, Execution, Fill, PortfolioState, TradeOp, TradeRecord};

use crate::indicators::FeatureFrame;
use crate::market_data::MarketFrame;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// Largest asset count whose joint action space is still enumerable.
pub const MAX_ASSETS: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("start index {start} leaves no room for a window of {window}")]
    StartTooEarly { start: usize, window: usize },
    #[error("start index {start} is at or past the last usable index {last}")]
    StartTooLate { start: usize, last: usize },
    #[error("action code {code} out of range for {assets} assets")]
    ActionOutOfRange { code: usize, assets: usize },
    #[error("episode is finished; call reset")]
    EpisodeDone,
    #[error("features and prices do not share a calendar and asset list")]
    Misaligned,
    #[error("{0} assets exceed the supported maximum of {MAX_ASSETS}")]
    TooManyAssets(usize),
    #[error("trade log: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = EnvError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub initial_capital: f64,
    pub fee_rate: f64,
    pub window: usize,
    pub buy_fraction: f64,
    pub sell_fraction: f64,
    pub invalid_penalty: f64,
    /// Steps per training episode.
    pub episode_length: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            initial_capital: 10_000.0,
            fee_rate: 0.0005,
            window: 20,
            buy_fraction: 0.2,
            sell_fraction: 0.5,
            invalid_penalty: 0.001,
            episode_length: 252,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        if !(self.initial_capital > 0.0) {
            return bad("initial_capital must be > 0");
        }
        if !(self.fee_rate >= 0.0) {
            return bad("fee_rate must be >= 0");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if !(self.buy_fraction > 0.0 && self.buy_fraction <= 1.0) {
            return bad("buy_fraction must be in (0, 1]");
        }
        if !(self.sell_fraction > 0.0 && self.sell_fraction <= 1.0) {
            return bad("sell_fraction must be in (0, 1]");
        }
        if !(self.invalid_penalty >= 0.0) {
            return bad("invalid_penalty must be >= 0");
        }
        if self.episode_length < 1 {
            return bad("episode_length must be >= 1");
        }
        Ok(())
    }
}

/// Integer-coded joint action; bit `i` selects buy (1) or sell (0) for asset `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionCode(pub usize);

pub fn num_actions(assets: usize) -> usize {
    1usize << assets
}

pub fn decode_action(code: ActionCode, assets: usize) -> Result<Vec<TradeOp>> {
    if assets > MAX_ASSETS {
        return Err(EnvError::TooManyAssets(assets));
    }
    if code.0 >= num_actions(assets) {
        return Err(EnvError::ActionOutOfRange { code: code.0, assets });
    }
    Ok((0..assets)
        .map(|i| if code.0 >> i & 1 == 1 { TradeOp::Buy } else { TradeOp::Sell })
        .collect())
}

/// Normalized features and raw prices on one calendar.
#[derive(Debug, Clone)]
pub struct EnvData {
    pub features: FeatureFrame,
    pub prices: MarketFrame,
}

impl EnvData {
    pub fn new(features: FeatureFrame, prices: MarketFrame) -> Result<Self> {
        if features.calendar != prices.calendar || features.tickers != prices.tickers {
            return Err(EnvError::Misaligned);
        }
        if features.num_assets() > MAX_ASSETS {
            return Err(EnvError::TooManyAssets(features.num_assets()));
        }
        Ok(Self { features, prices })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn num_assets(&self) -> usize {
        self.prices.num_assets()
    }

    pub fn num_features(&self) -> usize {
        self.features.num_features()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    /// `W x N x F`, oldest row first.
    pub window: Vec<f64>,
    pub portfolio: PortfolioState,
    pub closes: Vec<f64>,
    pub t: usize,
}

impl MarketState {
    /// Flattened window followed by the cash fraction and each asset's share
    /// of equity: `W*N*F + N + 1` values.
    pub fn policy_input(&self) -> Vec<f64> {
        let eq = self.portfolio.equity;
        let mut v = Vec::with_capacity(self.window.len() + self.closes.len() + 1);
        v.extend_from_slice(&self.window);
        v.push(self.portfolio.cash / eq);
        v.extend(
            self.portfolio
                .positions
                .iter()
                .zip(&self.closes)
                .map(|(q, p)| *q as f64 * p / eq),
        );
        v
    }
}

pub fn policy_input_len(window: usize, assets: usize, features: usize) -> usize {
    window * assets * features + assets + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub trades: Vec<TradeRecord>,
    pub fees: f64,
    pub invalid: usize,
    pub equity_before: f64,
    pub equity_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: MarketState,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct TradingEnv {
    config: EnvConfig,
    data: Arc<EnvData>,
    portfolio: PortfolioState,
    t: usize,
    end: usize,
    done: bool,
}

impl TradingEnv {
    pub fn new(config: EnvConfig, data: Arc<EnvData>) -> Result<Self> {
        config.validate()?;
        let n = data.num_assets();
        Ok(Self {
            portfolio: PortfolioState::new(config.initial_capital, n),
            config,
            data,
            t: 0,
            end: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn data(&self) -> &EnvData {
        &self.data
    }

    /// First index with a full window behind it.
    pub fn first_start(&self) -> usize {
        self.config.window - 1
    }

    /// Start an episode of `episode_length` steps (clipped to the data).
    pub fn reset(&mut self, start: usize) -> Result<MarketState> {
        let end = (start + self.config.episode_length).min(self.data.len().saturating_sub(1));
        self.reset_range(start, end)
    }

    /// Start an episode that trades from `start` and ends at index `end`.
    pub fn reset_range(&mut self, start: usize, end: usize) -> Result<MarketState> {
        if start + 1 < self.config.window {
            return Err(EnvError::StartTooEarly {
                start,
                window: self.config.window,
            });
        }
        let last = self.data.len().saturating_sub(1);
        if start >= end || end > last {
            return Err(EnvError::StartTooLate { start, last: end.min(last) });
        }
        self.portfolio = PortfolioState::new(self.config.initial_capital, self.data.num_assets());
        self.t = start;
        self.end = end;
        self.done = false;
        self.portfolio.mark(&self.data.prices.closes_at(start));
        Ok(self.observe())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn portfolio(&self) -> &PortfolioState {
        &self.portfolio
    }

    pub fn observe(&self) -> MarketState {
        let w = self.config.window;
        let f = &self.data.features;
        let lo = self.t + 1 - w;
        let mut window = Vec::with_capacity(w * f.num_assets() * f.num_features());
        for t in lo..=self.t {
            window.extend_from_slice(f.row(t));
        }
        MarketState {
            window,
            portfolio: self.portfolio.clone(),
            closes: self.data.prices.closes_at(self.t),
            t: self.t,
        }
    }

    pub fn equity(&self) -> f64 {
        self.portfolio.value_at(&self.data.prices.closes_at(self.t))
    }

    pub fn num_actions(&self) -> usize {
        num_actions(self.data.num_assets())
    }

    pub fn input_len(&self) -> usize {
        policy_input_len(self.config.window, self.data.num_assets(), self.data.num_features())
    }

    pub fn step(&mut self, action: ActionCode) -> Result<StepResult> {
        let ops = decode_action(action, self.data.num_assets())?;
        self.step_ops(&ops)
    }

    /// Step with explicit per-asset orders, `Hold` included.
    pub fn step_ops(&mut self, ops: &[TradeOp]) -> Result<StepResult> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let prices = &self.data.prices;
        let closes = prices.closes_at(self.t);
        let equity_before = self.portfolio.value_at(&closes);
        let exec = execute(
            &mut self.portfolio,
            ops,
            &Fill {
                t: self.t,
                date: prices.calendar[self.t],
                tickers: &prices.tickers,
                closes: &closes,
            },
            &self.config,
        );
        self.t += 1;
        let equity_after = self.portfolio.mark(&prices.closes_at(self.t));
        let reward = (equity_after - equity_before) / self.config.initial_capital
            - self.config.invalid_penalty * exec.invalid as f64;
        self.done = self.t >= self.end;
        Ok(StepResult {
            next_state: self.observe(),
            reward,
            done: self.done,
            info: StepInfo {
                trades: exec.trades,
                fees: exec.fees,
                invalid: exec.invalid,
                equity_before,
                equity_after,
            },
        })
    }
}

pub const TRADE_LOG_HEADER: &str = "t,date,asset,op,shares,price,fee,cash_after,equity_after";

/// Write trades as CSV with the standard header.
pub fn write_trade_log<W: Write>(out: &mut W, trades: &[TradeRecord]) -> Result<()> {
    writeln!(out, "{TRADE_LOG_HEADER}")?;
    for r in trades {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.date,
            r.asset,
            r.op.as_str(),
            r.shares,
            r.price,
            r.fee,
            r.cash_after,
            r.equity_after
        )?;
    }
    Ok(())
}
