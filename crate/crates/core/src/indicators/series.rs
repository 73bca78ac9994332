//! Indicators over a single price line. `NaN` marks undefined entries.

use super::{IndicatorError, Result};

fn check_period(period: usize, min: usize, what: &'static str) -> Result<()> {
    if period < min {
        return Err(IndicatorError::InvalidParameter(format!(
            "{what} period must be >= {min}, got {period}"
        )));
    }
    Ok(())
}

/// Simple moving average. First `period - 1` entries undefined.
pub fn sma(close: &[f64], period: usize) -> Result<Vec<f64>> {
    check_period(period, 1, "sma")?;
    if close.len() < period {
        return Err(IndicatorError::TooShort {
            needed: period,
            found: close.len(),
        });
    }
    let mut out = vec![f64::NAN; close.len()];
    let mut sum: f64 = close[..period].iter().sum();
    out[period - 1] = sum / period as f64;
    for t in period..close.len() {
        sum += close[t] - close[t - period];
        out[t] = sum / period as f64;
    }
    Ok(out)
}

/// EMA over the defined tail of `values`, seeded with the SMA of its first
/// `period` defined entries. Leading `NaN`s are skipped.
pub(crate) fn ema_from_defined(values: &[f64], period: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; values.len()];
    let Some(start) = values.iter().position(|v| !v.is_nan()) else {
        return out;
    };
    if values.len() - start < period {
        return out;
    }
    let alpha = 2.0 / (period as f64 + 1.0);
    let seed_at = start + period - 1;
    let mut prev = values[start..=seed_at].iter().sum::<f64>() / period as f64;
    out[seed_at] = prev;
    for t in seed_at + 1..values.len() {
        prev = alpha * values[t] + (1.0 - alpha) * prev;
        out[t] = prev;
    }
    out
}

/// Exponential moving average with `alpha = 2 / (period + 1)`, SMA-seeded.
/// Series shorter than `period` come back entirely undefined.
pub fn ema(close: &[f64], period: usize) -> Result<Vec<f64>> {
    check_period(period, 1, "ema")?;
    Ok(ema_from_defined(close, period))
}

/// Population standard deviation over a trailing window.
pub fn rolling_stddev(close: &[f64], period: usize) -> Result<Vec<f64>> {
    check_period(period, 2, "stddev")?;
    if close.len() < period {
        return Err(IndicatorError::TooShort {
            needed: period,
            found: close.len(),
        });
    }
    let n = period as f64;
    let mut out = vec![f64::NAN; close.len()];
    // Sliding Welford: maintain the window mean and sum of squared deviations.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, x) in close[..period].iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    out[period - 1] = (m2.max(0.0) / n).sqrt();
    for t in period..close.len() {
        let (x_new, x_old) = (close[t], close[t - period]);
        let new_mean = mean + (x_new - x_old) / n;
        m2 += (x_new - x_old) * (x_new - new_mean + x_old - mean);
        mean = new_mean;
        out[t] = (m2.max(0.0) / n).sqrt();
    }
    Ok(out)
}

pub struct Bollinger {
    pub middle: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

pub fn bollinger(close: &[f64], period: usize, k: f64) -> Result<Bollinger> {
    if !(k > 0.0) {
        return Err(IndicatorError::InvalidParameter(format!(
            "bollinger k must be > 0, got {k}"
        )));
    }
    let middle = sma(close, period)?;
    let sd = rolling_stddev(close, period)?;
    let upper = middle.iter().zip(&sd).map(|(m, s)| m + k * s).collect();
    let lower = middle.iter().zip(&sd).map(|(m, s)| m - k * s).collect();
    Ok(Bollinger {
        middle,
        upper,
        lower,
    })
}

fn rsi_value(avg_gain: f64, avg_loss: f64) -> f64 {
    if avg_loss == 0.0 {
        if avg_gain == 0.0 {
            50.0
        } else {
            100.0
        }
    } else {
        100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    }
}

/// Wilder RSI. First `period` entries undefined.
pub fn rsi(close: &[f64], period: usize) -> Result<Vec<f64>> {
    check_period(period, 1, "rsi")?;
    let mut out = vec![f64::NAN; close.len()];
    if close.len() < period + 1 {
        return Ok(out);
    }
    let p = period as f64;
    let (mut gain, mut loss) = (0.0, 0.0);
    for t in 1..=period {
        let d = close[t] - close[t - 1];
        gain += d.max(0.0);
        loss += (-d).max(0.0);
    }
    gain /= p;
    loss /= p;
    out[period] = rsi_value(gain, loss);
    for t in period + 1..close.len() {
        let d = close[t] - close[t - 1];
        gain = (gain * (p - 1.0) + d.max(0.0)) / p;
        loss = (loss * (p - 1.0) + (-d).max(0.0)) / p;
        out[t] = rsi_value(gain, loss);
    }
    Ok(out)
}

pub struct Macd {
    pub line: Vec<f64>,
    pub signal: Vec<f64>,
    pub histogram: Vec<f64>,
}

pub fn macd_warmup(slow: usize, signal: usize) -> usize {
    slow - 1 + signal - 1
}

/// MACD line, signal line and histogram; all three share the warmup
/// `slow - 1 + signal - 1`.
pub fn macd(close: &[f64], fast: usize, slow: usize, signal: usize) -> Result<Macd> {
    check_period(fast, 1, "macd fast")?;
    check_period(signal, 1, "macd signal")?;
    if fast >= slow {
        return Err(IndicatorError::InvalidParameter(format!(
            "macd fast period {fast} must be < slow period {slow}"
        )));
    }
    let fast_ema = ema_from_defined(close, fast);
    let slow_ema = ema_from_defined(close, slow);
    let mut line: Vec<f64> = fast_ema.iter().zip(&slow_ema).map(|(f, s)| f - s).collect();
    let signal_line = ema_from_defined(&line, signal);
    let warmup = macd_warmup(slow, signal).min(close.len());
    line[..warmup].fill(f64::NAN);
    let histogram = line.iter().zip(&signal_line).map(|(m, s)| m - s).collect();
    Ok(Macd {
        line,
        signal: signal_line,
        histogram,
    })
}
