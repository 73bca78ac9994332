//! Cash and share bookkeeping shared by the RL environment and every
//! rule-based strategy.

use super::EnvConfig;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TradeOp {
    Buy,
    Sell,
    Hold,
}

impl TradeOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Buy => "buy",
            Self::Sell => "sell",
            Self::Hold => "hold",
        }
    }
}

/// Cash plus whole-share long positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioState {
    pub cash: f64,
    pub positions: Vec<u64>,
    /// Mark-to-market value at the last price seen.
    pub equity: f64,
}

impl PortfolioState {
    pub fn new(cash: f64, assets: usize) -> Self {
        Self {
            cash,
            positions: vec![0; assets],
            equity: cash,
        }
    }

    pub fn value_at(&self, closes: &[f64]) -> f64 {
        self.cash
            + self
                .positions
                .iter()
                .zip(closes)
                .map(|(q, p)| *q as f64 * p)
                .sum::<f64>()
    }

    pub fn mark(&mut self, closes: &[f64]) -> f64 {
        self.equity = self.value_at(closes);
        self.equity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub t: usize,
    pub date: NaiveDate,
    pub asset: String,
    pub op: TradeOp,
    pub shares: u64,
    pub price: f64,
    pub fee: f64,
    pub cash_after: f64,
    pub equity_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Execution {
    pub trades: Vec<TradeRecord>,
    pub fees: f64,
    pub invalid: usize,
}

/// Where and when the orders are filled.
pub struct Fill<'a> {
    pub t: usize,
    pub date: NaiveDate,
    pub tickers: &'a [String],
    pub closes: &'a [f64],
}

/// Apply one order per asset, in asset order, at the given closes.
///
/// Buys spend `buy_fraction` of the cash held before this call, so budgets
/// do not compound within a step. When earlier orders have already used the
/// cash, a buy shrinks to what is still affordable; a buy that ends up at
/// zero shares counts as invalid. Selling an empty position is a no-op.
pub fn execute(portfolio: &mut PortfolioState, ops: &[TradeOp], fill: &Fill<'_>, config: &EnvConfig) -> Execution {
    debug_assert_eq!(ops.len(), portfolio.positions.len());
    let decision_cash = portfolio.cash;
    let mut out = Execution::default();

    for (i, op) in ops.iter().enumerate() {
        let price = fill.closes[i];
        let (shares, fee) = match op {
            TradeOp::Hold => continue,
            TradeOp::Buy => {
                let budget = decision_cash * config.buy_fraction;
                let wanted = (budget / price).floor() as u64;
                let unit = price * (1.0 + config.fee_rate);
                let mut shares = wanted.min((portfolio.cash / unit).floor() as u64);
                while shares > 0 && total_cost(shares, price, config.fee_rate) > portfolio.cash {
                    shares -= 1;
                }
                if shares == 0 {
                    out.invalid += 1;
                    continue;
                }
                let cost = shares as f64 * price;
                let fee = cost * config.fee_rate;
                portfolio.cash -= cost + fee;
                portfolio.positions[i] += shares;
                (shares, fee)
            }
            TradeOp::Sell => {
                let shares = (portfolio.positions[i] as f64 * config.sell_fraction).floor() as u64;
                if shares == 0 {
                    continue;
                }
                let proceeds = shares as f64 * price;
                let fee = proceeds * config.fee_rate;
                portfolio.cash += proceeds - fee;
                portfolio.positions[i] -= shares;
                (shares, fee)
            }
        };
        out.fees += fee;
        out.trades.push(TradeRecord {
            t: fill.t,
            date: fill.date,
            asset: fill.tickers[i].clone(),
            op: *op,
            shares,
            price,
            fee,
            cash_after: portfolio.cash,
            equity_after: portfolio.value_at(fill.closes),
        });
    }
    portfolio.mark(fill.closes);
    out
}

fn total_cost(shares: u64, price: f64, fee_rate: f64) -> f64 {
    let cost = shares as f64 * price;
    cost + cost * fee_rate
}
