//! Shared fixtures and direct-definition reference implementations.
//!
//! The references recompute every value from its closed form (full windows,
//! unrolled recursions) instead of the library's incremental updates.
#![allow(dead_code)]

use chrono::NaiveDate;
use quantrl_core::market_data::{AssetSeries, Bar, MarketFrame};
use quantrl_core::rng::ChaCha8Rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn day(offset: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + chrono::Days::new(offset as u64)
}

/// Geometric random walk with a plausible candle around each close.
pub fn random_walk_bars(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bar> {
    let step = Normal::new(0.0, 0.02).unwrap();
    let wick = Normal::new(0.0, 0.01).unwrap();
    let mut close = 50.0 + 100.0 * rng.random::<f64>();
    let mut bars = Vec::with_capacity(n);
    for t in 0..n {
        let open = close * (1.0 + wick.sample(rng));
        let s: f64 = step.sample(rng);
        close *= s.exp();
        let high = open.max(close) * (1.0 + wick.sample(rng).abs());
        let low = open.min(close) * (1.0 - wick.sample(rng).abs());
        bars.push(Bar {
            date: day(t),
            open,
            high,
            low,
            close,
            volume: 1000.0 + 1e5 * rng.random::<f64>(),
        });
    }
    bars
}

pub fn flat_bars(prices: &[f64]) -> Vec<Bar> {
    prices
        .iter()
        .enumerate()
        .map(|(t, &p)| Bar {
            date: day(t),
            open: p,
            high: p,
            low: p,
            close: p,
            volume: 1000.0,
        })
        .collect()
}

pub fn frame_from_closes(paths: &[Vec<f64>]) -> MarketFrame {
    let series = paths
        .iter()
        .enumerate()
        .map(|(i, p)| AssetSeries::new(format!("S{i}"), flat_bars(p)))
        .collect();
    MarketFrame::from_aligned(series).unwrap()
}

/// Both undefined, or within `tol`.
pub fn agree(a: &[f64], b: &[f64], tol: f64) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("length {} vs {}", a.len(), b.len()));
    }
    for (t, (x, y)) in a.iter().zip(b).enumerate() {
        let ok = (x.is_nan() && y.is_nan()) || (x - y).abs() <= tol;
        if !ok {
            return Err(format!("index {t}: {x} vs {y}"));
        }
    }
    Ok(())
}

pub fn closes(bars: &[Bar]) -> Vec<f64> {
    bars.iter().map(|b| b.close).collect()
}

pub fn ref_sma(x: &[f64], p: usize) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            if t + 1 < p {
                f64::NAN
            } else {
                x[t + 1 - p..=t].iter().sum::<f64>() / p as f64
            }
        })
        .collect()
}

/// EMA over `x[start..]`, seeded at `start + p - 1` with the mean of the
/// first `p` values, written as the explicit weighted sum.
pub fn ref_ema_from(x: &[f64], start: usize, p: usize) -> Vec<f64> {
    let a = 2.0 / (p as f64 + 1.0);
    let seed_at = start + p - 1;
    let mut out = vec![f64::NAN; x.len()];
    if seed_at >= x.len() {
        return out;
    }
    let seed = x[start..=seed_at].iter().sum::<f64>() / p as f64;
    for t in seed_at..x.len() {
        let mut v = (1.0 - a).powi((t - seed_at) as i32) * seed;
        for j in seed_at + 1..=t {
            v += a * (1.0 - a).powi((t - j) as i32) * x[j];
        }
        out[t] = v;
    }
    out
}

pub fn ref_ema(x: &[f64], p: usize) -> Vec<f64> {
    ref_ema_from(x, 0, p)
}

pub fn ref_stddev(x: &[f64], p: usize) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            if t + 1 < p {
                return f64::NAN;
            }
            let w = &x[t + 1 - p..=t];
            let m = w.iter().sum::<f64>() / p as f64;
            (w.iter().map(|v| (v - m).powi(2)).sum::<f64>() / p as f64).sqrt()
        })
        .collect()
}

/// Wilder average of `v[1..]`: seeded at index `p` by the mean of
/// `v[1..=p]`, then the unrolled decay with rate `1/p`.
fn ref_wilder(v: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; v.len()];
    if v.len() < p + 1 {
        return out;
    }
    let k = 1.0 / p as f64;
    let seed = v[1..=p].iter().sum::<f64>() / p as f64;
    for t in p..v.len() {
        let mut s = (1.0 - k).powi((t - p) as i32) * seed;
        for j in p + 1..=t {
            s += k * (1.0 - k).powi((t - j) as i32) * v[j];
        }
        out[t] = s;
    }
    out
}

pub fn ref_rsi(x: &[f64], p: usize) -> Vec<f64> {
    let mut gains = vec![0.0; x.len()];
    let mut losses = vec![0.0; x.len()];
    for t in 1..x.len() {
        let d = x[t] - x[t - 1];
        gains[t] = d.max(0.0);
        losses[t] = (-d).max(0.0);
    }
    let g = ref_wilder(&gains, p);
    let l = ref_wilder(&losses, p);
    g.iter()
        .zip(&l)
        .map(|(&g, &l)| {
            if g.is_nan() {
                f64::NAN
            } else if l == 0.0 && g == 0.0 {
                50.0
            } else if l == 0.0 {
                100.0
            } else {
                100.0 - 100.0 / (1.0 + g / l)
            }
        })
        .collect()
}

pub fn ref_true_range(bars: &[Bar]) -> Vec<f64> {
    (0..bars.len())
        .map(|t| {
            let b = &bars[t];
            if t == 0 {
                return b.high - b.low;
            }
            let pc = bars[t - 1].close;
            [b.high - b.low, (b.high - pc).abs(), (b.low - pc).abs()]
                .into_iter()
                .fold(f64::MIN, f64::max)
        })
        .collect()
}

pub fn ref_atr(bars: &[Bar], p: usize) -> Vec<f64> {
    ref_wilder(&ref_true_range(bars), p)
}

pub struct RefMacd {
    pub line: Vec<f64>,
    pub signal: Vec<f64>,
    pub histogram: Vec<f64>,
}

pub fn ref_macd(x: &[f64], fast: usize, slow: usize, signal: usize) -> RefMacd {
    let f = ref_ema(x, fast);
    let s = ref_ema(x, slow);
    let raw: Vec<f64> = f.iter().zip(&s).map(|(a, b)| a - b).collect();
    let sig = ref_ema_from(&raw, slow - 1, signal);
    let warmup = slow - 1 + signal - 1;
    let line: Vec<f64> = raw.iter().enumerate().map(|(t, v)| if t < warmup { f64::NAN } else { *v }).collect();
    let histogram = line.iter().zip(&sig).map(|(a, b)| a - b).collect();
    RefMacd {
        line,
        signal: sig,
        histogram,
    }
}

pub struct RefHa {
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
}

pub fn ref_heiken_ashi(bars: &[Bar]) -> RefHa {
    let close: Vec<f64> = bars.iter().map(|b| (b.open + b.high + b.low + b.close) / 4.0).collect();
    let first = (bars[0].open + bars[0].close) / 2.0;
    let open: Vec<f64> = (0..bars.len())
        .map(|t| {
            let mut v = 0.5f64.powi(t as i32) * first;
            for j in 0..t {
                v += 0.5f64.powi((t - j) as i32) * close[j];
            }
            v
        })
        .collect();
    let high = (0..bars.len()).map(|t| bars[t].high.max(open[t]).max(close[t])).collect();
    let low = (0..bars.len()).map(|t| bars[t].low.min(open[t]).min(close[t])).collect();
    RefHa { open, high, low, close }
}

pub fn ref_midpoint(bars: &[Bar], p: usize) -> Vec<f64> {
    (0..bars.len())
        .map(|t| {
            if t + 1 < p {
                return f64::NAN;
            }
            let w = &bars[t + 1 - p..=t];
            let hi = w.iter().map(|b| b.high).fold(f64::MIN, f64::max);
            let lo = w.iter().map(|b| b.low).fold(f64::MAX, f64::min);
            (hi + lo) / 2.0
        })
        .collect()
}

pub struct RefIchimoku {
    pub tenkan: Vec<f64>,
    pub kijun: Vec<f64>,
    pub senkou_a: Vec<f64>,
    pub senkou_b: Vec<f64>,
}

pub fn ref_ichimoku(bars: &[Bar], conv: usize, base: usize, span: usize) -> RefIchimoku {
    let mask = |v: Vec<f64>| -> Vec<f64> { v.into_iter().enumerate().map(|(t, x)| if t + 1 < span { f64::NAN } else { x }).collect() };
    let tenkan = ref_midpoint(bars, conv);
    let kijun = ref_midpoint(bars, base);
    let senkou_a: Vec<f64> = tenkan.iter().zip(&kijun).map(|(a, b)| (a + b) / 2.0).collect();
    RefIchimoku {
        tenkan: mask(tenkan),
        kijun: mask(kijun),
        senkou_a: mask(senkou_a),
        senkou_b: ref_midpoint(bars, span),
    }
}

/// Band ratchet simulated one step at a time from explicit band formulas.
pub fn ref_supertrend(bars: &[Bar], p: usize, m: f64) -> (Vec<f64>, Vec<f64>) {
    let atr = ref_atr(bars, p);
    let n = bars.len();
    let mut line = vec![f64::NAN; n];
    let mut dir = vec![f64::NAN; n];
    if n <= p {
        return (line, dir);
    }
    let mid = |t: usize| (bars[t].high + bars[t].low) / 2.0;
    let mut final_upper = vec![f64::NAN; n];
    let mut final_lower = vec![f64::NAN; n];
    for t in p..n {
        let bu = mid(t) + m * atr[t];
        let bl = mid(t) - m * atr[t];
        if t == p {
            final_upper[t] = bu;
            final_lower[t] = bl;
            dir[t] = if bars[t].close < bl { -1.0 } else { 1.0 };
        } else {
            let pc = bars[t - 1].close;
            final_upper[t] = if bu < final_upper[t - 1] || pc > final_upper[t - 1] { bu } else { final_upper[t - 1] };
            final_lower[t] = if bl > final_lower[t - 1] || pc < final_lower[t - 1] { bl } else { final_lower[t - 1] };
            let prev = dir[t - 1];
            dir[t] = if prev < 0.0 && bars[t].close > final_upper[t] {
                1.0
            } else if prev > 0.0 && bars[t].close < final_lower[t] {
                -1.0
            } else {
                prev
            };
        }
        line[t] = if dir[t] > 0.0 { final_lower[t] } else { final_upper[t] };
    }
    (line, dir)
}

/// Largest `(P_i - P_j) / P_i` over all `i <= j`, as a signed percent.
pub fn brute_drawdown(v: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        for j in i..v.len() {
            worst = worst.max((v[i] - v[j]) / v[i]);
        }
    }
    -100.0 * worst
}

/// `sum_k gamma^k r_{t+k}` plus the discounted tail value, term by term.
pub fn direct_returns(rewards: &[f64], gamma: f64, tail: f64) -> Vec<f64> {
    let n = rewards.len();
    (0..n)
        .map(|t| {
            let mut g = 0.0;
            for k in 0..n - t {
                g += gamma.powi(k as i32) * rewards[t + k];
            }
            g + gamma.powi((n - t) as i32) * tail
        })
        .collect()
}

pub mod envfuzz {
    use quantrl_core::env::{num_actions, ActionCode, EnvConfig, EnvData, TradeOp, TradingEnv};
    use quantrl_core::indicators::FeatureFrame;
    use quantrl_core::market_data::MarketFrame;
    use quantrl_core::rng::{seeded_rng, ChaCha8Rng};
    use rand::Rng;
    use std::sync::Arc;

    pub fn random_config(rng: &mut ChaCha8Rng, len: usize) -> EnvConfig {
        EnvConfig {
            initial_capital: rng.random_range(500.0..100_000.0),
            fee_rate: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..0.01) },
            window: rng.random_range(1..6),
            buy_fraction: rng.random_range(0.05..=1.0),
            sell_fraction: rng.random_range(0.05..=1.0),
            invalid_penalty: rng.random_range(0.0..0.01),
            episode_length: len,
        }
    }

    /// Environment data whose single feature is the close itself.
    pub fn env_data(prices: MarketFrame) -> Arc<EnvData> {
        let n = prices.num_assets();
        let mut values = Vec::with_capacity(prices.len() * n);
        for t in 0..prices.len() {
            values.extend(prices.closes_at(t));
        }
        let features = FeatureFrame {
            tickers: prices.tickers.clone(),
            calendar: prices.calendar.clone(),
            feature_names: vec!["close".into()],
            values,
        };
        Arc::new(EnvData::new(features, prices).unwrap())
    }

    pub fn random_prices(rng: &mut ChaCha8Rng, assets: usize, len: usize) -> MarketFrame {
        let paths: Vec<Vec<f64>> = (0..assets)
            .map(|_| {
                let mut p = rng.random_range(1.0..500.0);
                (0..len)
                    .map(|_| {
                        p *= 1.0 + rng.random_range(-0.08..0.08);
                        p
                    })
                    .collect()
            })
            .collect();
        super::frame_from_closes(&paths)
    }

    pub fn random_ops(rng: &mut ChaCha8Rng, assets: usize) -> Vec<TradeOp> {
        (0..assets)
            .map(|_| match rng.random_range(0..3) {
                0 => TradeOp::Buy,
                1 => TradeOp::Sell,
                _ => TradeOp::Hold,
            })
            .collect()
    }

    #[derive(Debug, Default)]
    pub struct FuzzStats {
        pub steps: usize,
        pub episodes: usize,
        pub trades: usize,
        /// Episodes where both runs filled the same share counts.
        pub matched_fills: usize,
        /// Episodes whose fee-paying run ended above the fee-free replay.
        pub fee_inversions: Vec<String>,
    }

    fn check_identity(env: &TradingEnv, closes: &[f64], step: usize) -> Result<(), String> {
        let p = env.portfolio();
        if !(p.cash >= 0.0) {
            return Err(format!("step {step}: cash {}", p.cash));
        }
        let direct = p.cash + p.positions.iter().zip(closes).map(|(q, c)| *q as f64 * c).sum::<f64>();
        let eq = env.equity();
        if (eq - direct).abs() > 1e-9 * eq.abs().max(1.0) || (p.equity - direct).abs() > 1e-9 * direct.abs().max(1.0) {
            return Err(format!("step {step}: equity {eq} / {} vs cash+positions {direct}", p.equity));
        }
        Ok(())
    }

    /// Random configs, prices and orders for `total` steps. Every episode is
    /// replayed with the fee set to zero; inversions are collected rather
    /// than failed, except when both runs filled identical share counts.
    pub fn fuzz(total: usize, seed: u64) -> Result<FuzzStats, String> {
        let mut rng = seeded_rng(seed);
        let mut stats = FuzzStats::default();
        while stats.steps < total {
            let assets = rng.random_range(1..=4);
            let len = rng.random_range(20..200);
            let cfg = random_config(&mut rng, len);
            let data = env_data(random_prices(&mut rng, assets, len));
            let mut env = TradingEnv::new(cfg.clone(), data.clone()).unwrap();
            let mut free = TradingEnv::new(EnvConfig { fee_rate: 0.0, ..cfg.clone() }, data.clone()).unwrap();
            let start = env.first_start();
            env.reset_range(start, len - 1).unwrap();
            free.reset_range(start, len - 1).unwrap();
            let start_equity = env.equity();
            let (mut reward_sum, mut penalty_sum) = (0.0, 0.0);
            let mut same_fills = true;
            while !env.is_done() {
                let ops = if rng.random_bool(0.5) {
                    random_ops(&mut rng, assets)
                } else {
                    let code = rng.random_range(0..num_actions(assets));
                    quantrl_core::env::decode_action(ActionCode(code), assets).unwrap()
                };
                let r = env.step_ops(&ops).map_err(|e| e.to_string())?;
                let rf = free.step_ops(&ops).map_err(|e| e.to_string())?;
                same_fills &= r.info.trades.len() == rf.info.trades.len()
                    && r.info.trades.iter().zip(&rf.info.trades).all(|(a, b)| a.asset == b.asset && a.shares == b.shares);
                stats.steps += 1;
                stats.trades += r.info.trades.len();
                reward_sum += r.reward * cfg.initial_capital;
                penalty_sum += cfg.invalid_penalty * r.info.invalid as f64 * cfg.initial_capital;
                check_identity(&env, &data.prices.closes_at(env.t()), stats.steps)?;
            }
            let change = env.equity() - start_equity;
            if (reward_sum + penalty_sum - change).abs() > 1e-6 {
                return Err(format!(
                    "episode {}: rewards telescope to {} but equity moved {change}",
                    stats.episodes,
                    reward_sum + penalty_sum
                ));
            }
            if env.equity() > free.equity() + 1e-9 {
                let msg = format!(
                    "episode {} (step {}): fee-paying run ends at {:.4}, fee-free at {:.4}",
                    stats.episodes,
                    stats.steps,
                    env.equity(),
                    free.equity()
                );
                if same_fills {
                    return Err(format!("{msg} despite identical fills"));
                }
                stats.fee_inversions.push(msg);
            }
            if same_fills {
                stats.matched_fills += 1;
            }
            stats.episodes += 1;
        }
        Ok(stats)
    }
}
