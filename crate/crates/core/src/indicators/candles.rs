//! Indicators that need the full candle rather than just the close.

use super::{IndicatorError, Result};
use crate::market_data::Bar;
use std::collections::VecDeque;

fn true_range(bar: &Bar, prev_close: f64) -> f64 {
    (bar.high - bar.low)
        .max((bar.high - prev_close).abs())
        .max((bar.low - prev_close).abs())
}

/// Wilder-smoothed average true range. True range needs a previous close, so
/// the first value appears at index `period`.
pub fn atr(bars: &[Bar], period: usize) -> Result<Vec<f64>> {
    if period < 1 {
        return Err(IndicatorError::InvalidParameter("atr period must be >= 1".into()));
    }
    let mut out = vec![f64::NAN; bars.len()];
    if bars.len() < period + 1 {
        return Ok(out);
    }
    let p = period as f64;
    let mut value = (1..=period)
        .map(|t| true_range(&bars[t], bars[t - 1].close))
        .sum::<f64>()
        / p;
    out[period] = value;
    for t in period + 1..bars.len() {
        value = (value * (p - 1.0) + true_range(&bars[t], bars[t - 1].close)) / p;
        out[t] = value;
    }
    Ok(out)
}

pub struct HeikenAshi {
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
}

pub fn heiken_ashi(bars: &[Bar]) -> Result<HeikenAshi> {
    if bars.is_empty() {
        return Err(IndicatorError::Empty);
    }
    let n = bars.len();
    let mut ha = HeikenAshi {
        open: Vec::with_capacity(n),
        high: Vec::with_capacity(n),
        low: Vec::with_capacity(n),
        close: Vec::with_capacity(n),
    };
    for (t, b) in bars.iter().enumerate() {
        let close = (b.open + b.high + b.low + b.close) / 4.0;
        let open = if t == 0 {
            (b.open + b.close) / 2.0
        } else {
            (ha.open[t - 1] + ha.close[t - 1]) / 2.0
        };
        ha.high.push(b.high.max(open).max(close));
        ha.low.push(b.low.min(open).min(close));
        ha.open.push(open);
        ha.close.push(close);
    }
    Ok(ha)
}

/// `(max high + min low) / 2` over a trailing window, via monotone deques.
fn rolling_midpoint(highs: &[f64], lows: &[f64], period: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; highs.len()];
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for t in 0..highs.len() {
        while maxq.back().is_some_and(|&j| highs[j] <= highs[t]) {
            maxq.pop_back();
        }
        maxq.push_back(t);
        while minq.back().is_some_and(|&j| lows[j] >= lows[t]) {
            minq.pop_back();
        }
        minq.push_back(t);
        if t + 1 >= period {
            let oldest = t + 1 - period;
            while maxq.front().is_some_and(|&j| j < oldest) {
                maxq.pop_front();
            }
            while minq.front().is_some_and(|&j| j < oldest) {
                minq.pop_front();
            }
            out[t] = (highs[maxq[0]] + lows[minq[0]]) / 2.0;
        }
    }
    out
}

pub struct Ichimoku {
    pub tenkan: Vec<f64>,
    pub kijun: Vec<f64>,
    pub senkou_a: Vec<f64>,
    pub senkou_b: Vec<f64>,
}

/// Ichimoku lines, stored at the bar they are computed from (spans are not
/// shifted forward). All four share the warmup `span - 1`.
pub fn ichimoku(bars: &[Bar], conversion: usize, base: usize, span: usize) -> Result<Ichimoku> {
    if !(1 <= conversion && conversion < base && base < span) {
        return Err(IndicatorError::InvalidParameter(format!(
            "ichimoku needs 1 <= conversion < base < span, got ({conversion}, {base}, {span})"
        )));
    }
    let highs: Vec<f64> = bars.iter().map(|b| b.high).collect();
    let lows: Vec<f64> = bars.iter().map(|b| b.low).collect();
    let mut tenkan = rolling_midpoint(&highs, &lows, conversion);
    let mut kijun = rolling_midpoint(&highs, &lows, base);
    let senkou_b = rolling_midpoint(&highs, &lows, span);
    let warmup = (span - 1).min(bars.len());
    tenkan[..warmup].fill(f64::NAN);
    kijun[..warmup].fill(f64::NAN);
    let senkou_a = tenkan.iter().zip(&kijun).map(|(a, b)| (a + b) / 2.0).collect();
    Ok(Ichimoku {
        tenkan,
        kijun,
        senkou_a,
        senkou_b,
    })
}

pub struct SuperTrend {
    pub line: Vec<f64>,
    /// +1 uptrend, -1 downtrend; `NaN` during warmup.
    pub direction: Vec<f64>,
}

/// ATR band trailing stop. Bands ratchet: the upper band only moves down
/// (and the lower only up) unless the previous close broke through it.
pub fn supertrend(bars: &[Bar], period: usize, multiplier: f64) -> Result<SuperTrend> {
    if !(multiplier > 0.0) {
        return Err(IndicatorError::InvalidParameter(format!(
            "supertrend multiplier must be > 0, got {multiplier}"
        )));
    }
    let range = atr(bars, period)?;
    let n = bars.len();
    let mut line = vec![f64::NAN; n];
    let mut direction = vec![f64::NAN; n];
    if n <= period {
        return Ok(SuperTrend { line, direction });
    }
    let t0 = period;
    let mut upper = bars[t0].hl2() + multiplier * range[t0];
    let mut lower = bars[t0].hl2() - multiplier * range[t0];
    let mut dir = if bars[t0].close < lower { -1.0 } else { 1.0 };
    line[t0] = if dir > 0.0 { lower } else { upper };
    direction[t0] = dir;
    for t in t0 + 1..n {
        let basic_upper = bars[t].hl2() + multiplier * range[t];
        let basic_lower = bars[t].hl2() - multiplier * range[t];
        let prev_close = bars[t - 1].close;
        if basic_upper < upper || prev_close > upper {
            upper = basic_upper;
        }
        if basic_lower > lower || prev_close < lower {
            lower = basic_lower;
        }
        let close = bars[t].close;
        if dir < 0.0 && close > upper {
            dir = 1.0;
        } else if dir > 0.0 && close < lower {
            dir = -1.0;
        }
        line[t] = if dir > 0.0 { lower } else { upper };
        direction[t] = dir;
    }
    Ok(SuperTrend { line, direction })
}
