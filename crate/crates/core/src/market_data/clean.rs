use super::{DataError, MarketFrame, Result};

fn forward_fill(values: &mut [f64]) {
    let mut last = f64::NAN;
    for v in values.iter_mut() {
        if v.is_finite() {
            last = *v;
        } else {
            *v = last;
        }
    }
}

/// Forward-fill missing prices, zero missing volumes and drop the leading
/// calendar rows where any asset has no prior price observation.
///
/// High and low are widened to envelope open and close so every bar is a
/// valid candle afterwards.
pub fn clean(frame: &MarketFrame) -> Result<MarketFrame> {
    let mut frame = frame.clone();
    let mut first_complete = 0usize;
    for series in &mut frame.series {
        let mut fields: [Vec<f64>; 4] = [
            series.bars.iter().map(|b| b.open).collect(),
            series.bars.iter().map(|b| b.high).collect(),
            series.bars.iter().map(|b| b.low).collect(),
            series.bars.iter().map(|b| b.close).collect(),
        ];
        for f in &mut fields {
            forward_fill(f);
        }
        for (t, bar) in series.bars.iter_mut().enumerate() {
            bar.open = fields[0][t];
            bar.high = fields[1][t];
            bar.low = fields[2][t];
            bar.close = fields[3][t];
            if !bar.volume.is_finite() {
                bar.volume = 0.0;
            }
        }
        let start = series
            .bars
            .iter()
            .position(|b| b.has_prices())
            .ok_or_else(|| DataError::EntirelyMissing(series.ticker.clone()))?;
        first_complete = first_complete.max(start);
    }

    frame.calendar.drain(..first_complete);
    for series in &mut frame.series {
        series.bars.drain(..first_complete);
        for bar in &mut series.bars {
            bar.high = bar.high.max(bar.open).max(bar.close);
            bar.low = bar.low.min(bar.open).min(bar.close);
        }
    }
    Ok(frame)
}
