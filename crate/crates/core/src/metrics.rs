//! Performance metrics over equity curves.
//!
//! Returns are daily simple returns. Sharpe and volatility are annualized
//! with `sqrt(252)` and use the sample standard deviation; the risk-free
//! rate is zero. Return, volatility and drawdown are in percent, drawdown
//! signed so that losses are negative.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("curve `{label}` has {found} points, need at least {needed}")]
    TooShort { label: String, needed: usize, found: usize },
    #[error("curve `{0}` has a non-positive or non-finite value")]
    NonPositive(String),
    #[error("curve `{0}` has mismatched dates and values")]
    Misaligned(String),
    #[error("nothing to aggregate")]
    Empty,
    #[error("mismatched periods: {0}")]
    MismatchedPeriods(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquityCurve {
    pub label: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl EquityCurve {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if dates.len() != values.len() {
            return Err(MetricsError::Misaligned(label));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MetricsError::NonPositive(label));
        }
        Ok(Self { label, dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        daily_returns(&self.values)
    }

    fn period(&self) -> Option<(NaiveDate, NaiveDate)> {
        Some((*self.dates.first()?, *self.dates.last()?))
    }
}

pub fn daily_returns(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
}

fn check(values: &[f64], needed: usize) -> Result<()> {
    if values.len() < needed {
        return Err(MetricsError::TooShort {
            label: String::new(),
            needed,
            found: values.len(),
        });
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(MetricsError::NonPositive(String::new()));
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `100 * (P_end - P_start) / P_start`.
pub fn total_return(values: &[f64]) -> Result<f64> {
    check(values, 1)?;
    let (first, last) = (values[0], values[values.len() - 1]);
    Ok(100.0 * (last - first) / first)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpeRatio {
    pub value: f64,
    /// Returns had zero spread, so the ratio was defined as 0.
    pub degenerate: bool,
}

pub fn sharpe(values: &[f64]) -> Result<SharpeRatio> {
    check(values, 3)?;
    let (mean, sd) = mean_std(&daily_returns(values));
    // std below float noise of the mean counts as zero spread
    if sd <= 1e-12 * mean.abs() {
        return Ok(SharpeRatio {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(SharpeRatio {
        value: mean / sd * TRADING_DAYS.sqrt(),
        degenerate: false,
    })
}

pub fn volatility(values: &[f64]) -> Result<f64> {
    check(values, 3)?;
    let (_, sd) = mean_std(&daily_returns(values));
    Ok(sd * TRADING_DAYS.sqrt() * 100.0)
}

/// Largest peak-to-trough fall as a signed percent in `[-100, 0]`.
pub fn max_drawdown(values: &[f64]) -> Result<f64> {
    check(values, 1)?;
    let mut peak = values[0];
    let mut worst = 0.0f64;
    for &v in values {
        peak = peak.max(v);
        worst = worst.max((peak - v) / peak);
    }
    // adding zero turns -0.0 into 0.0 so a flat curve prints as 0.00
    Ok(-100.0 * worst + 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub return_rate: f64,
    pub sharpe_ratio: f64,
    pub volatility: f64,
    pub max_drawdown: f64,
    pub sharpe_degenerate: bool,
}

pub fn evaluate(curve: &EquityCurve) -> Result<CurveMetrics> {
    let with_label = |e: MetricsError| match e {
        MetricsError::TooShort { needed, found, .. } => MetricsError::TooShort {
            label: curve.label.clone(),
            needed,
            found,
        },
        MetricsError::NonPositive(_) => MetricsError::NonPositive(curve.label.clone()),
        other => other,
    };
    let v = &curve.values;
    let (start, end) = curve.period().ok_or_else(|| {
        with_label(MetricsError::TooShort {
            label: String::new(),
            needed: 3,
            found: 0,
        })
    })?;
    let s = sharpe(v).map_err(with_label)?;
    Ok(CurveMetrics {
        label: curve.label.clone(),
        start,
        end,
        return_rate: total_return(v).map_err(with_label)?,
        sharpe_ratio: s.value,
        volatility: volatility(v).map_err(with_label)?,
        max_drawdown: max_drawdown(v).map_err(with_label)?,
        sharpe_degenerate: s.degenerate,
    })
}

/// Arithmetic mean of each metric across assets covering the same period.
pub fn aggregate(items: &[CurveMetrics]) -> Result<CurveMetrics> {
    let first = items.first().ok_or(MetricsError::Empty)?;
    if let Some(bad) = items.iter().find(|m| (m.start, m.end) != (first.start, first.end)) {
        return Err(MetricsError::MismatchedPeriods(format!(
            "`{}` covers {}..{}, `{}` covers {}..{}",
            first.label, first.start, first.end, bad.label, bad.start, bad.end
        )));
    }
    let n = items.len() as f64;
    let avg = |f: fn(&CurveMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
    Ok(CurveMetrics {
        label: "mean".into(),
        start: first.start,
        end: first.end,
        return_rate: avg(|m| m.return_rate),
        sharpe_ratio: avg(|m| m.sharpe_ratio),
        volatility: avg(|m| m.volatility),
        max_drawdown: avg(|m| m.max_drawdown),
        sharpe_degenerate: items.iter().any(|m| m.sharpe_degenerate),
    })
}

/// Sum of several curves over identical dates, as one combined account.
pub fn pooled_curve(curves: &[EquityCurve]) -> Result<EquityCurve> {
    let first = curves.first().ok_or(MetricsError::Empty)?;
    if let Some(bad) = curves.iter().find(|c| c.dates != first.dates) {
        return Err(MetricsError::MismatchedPeriods(format!(
            "`{}` and `{}` have different dates",
            first.label, bad.label
        )));
    }
    let values = (0..first.len())
        .map(|t| curves.iter().map(|c| c.values[t]).sum())
        .collect();
    EquityCurve::new("pooled", first.dates.clone(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: String,
    pub year: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub data_fingerprint: String,
    pub assets: Vec<CurveMetrics>,
    /// Per-asset mean; the headline numbers.
    pub portfolio: CurveMetrics,
    /// Metrics of the summed account, reported alongside the mean.
    pub pooled: CurveMetrics,
}

impl MetricsReport {
    pub fn from_curves(strategy: &str, year: &str, seed: Option<u64>, curves: &[EquityCurve]) -> Result<Self> {
        let assets = curves.iter().map(evaluate).collect::<Result<Vec<_>>>()?;
        let portfolio = aggregate(&assets)?;
        let pooled = evaluate(&pooled_curve(curves)?)?;
        Ok(Self {
            strategy: strategy.into(),
            year: year.into(),
            seed,
            config_hash: String::new(),
            data_fingerprint: String::new(),
            assets,
            portfolio,
            pooled,
        })
    }

    pub fn row(&self) -> TableRow {
        TableRow::new(&self.year, &self.strategy, &self.portfolio)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub year: String,
    pub strategy: String,
    pub return_rate: f64,
    pub sharpe_ratio: f64,
    pub volatility: f64,
    pub max_drawdown: f64,
}

impl TableRow {
    pub fn new(year: &str, strategy: &str, m: &CurveMetrics) -> Self {
        Self {
            year: year.into(),
            strategy: strategy.into(),
            return_rate: m.return_rate,
            sharpe_ratio: m.sharpe_ratio,
            volatility: m.volatility,
            max_drawdown: m.max_drawdown,
        }
    }

    /// Field-wise mean of several rows, e.g. across seeds.
    pub fn mean(year: &str, strategy: &str, rows: &[TableRow]) -> Option<Self> {
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let avg = |f: fn(&TableRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        Some(Self {
            year: year.into(),
            strategy: strategy.into(),
            return_rate: avg(|r| r.return_rate),
            sharpe_ratio: avg(|r| r.sharpe_ratio),
            volatility: avg(|r| r.volatility),
            max_drawdown: avg(|r| r.max_drawdown),
        })
    }
}

pub const TABLE_HEADER: &str = "Year,Strategy,Return_Rate,Sharpe_Ratio,Volatility,Max_Drawdown";

/// Table CSV with values rounded to two decimals.
pub fn write_table<W: Write>(out: &mut W, rows: &[TableRow]) -> std::io::Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.2},{:.2},{:.2},{:.2}",
            r.year,
            csv_field(&r.strategy),
            r.return_rate,
            r.sharpe_ratio,
            r.volatility,
            r.max_drawdown
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(label: &str, values: &[f64]) -> EquityCurve {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..values.len()).map(|k| d0 + chrono::Days::new(k as u64)).collect();
        EquityCurve::new(label, dates, values.to_vec()).unwrap()
    }

    #[test]
    fn total_return_examples() {
        assert!((total_return(&[10_000.0, 11_188.0]).unwrap() - 11.88).abs() < 1e-9);
        assert_eq!(total_return(&[5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert_eq!(total_return(&[100.0, 50.0]).unwrap(), -50.0);
        assert!(total_return(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn sharpe_examples() {
        let s = sharpe(&[100.0, 101.0, 100.0, 101.0, 100.0]);
        assert!(s.is_ok());
        let flat = sharpe(&[100.0; 10]).unwrap();
        assert_eq!(flat, SharpeRatio { value: 0.0, degenerate: true });
        let growth: Vec<f64> = (0..30).map(|k| 100.0 * 1.01f64.powi(k)).collect();
        let g = sharpe(&growth).unwrap();
        assert!(g.degenerate && g.value == 0.0);
        // returns +r, -r, +r, -r around equal-magnitude multiplicative moves sum to ~0 mean
        let mut v = vec![100.0];
        for k in 0..200 {
            let r = if k % 2 == 0 { 0.01 } else { -0.01 / 1.01 };
            v.push(v[k] * (1.0 + r));
        }
        assert!(sharpe(&v).unwrap().value.abs() < 0.5);
    }

    #[test]
    fn volatility_examples() {
        assert_eq!(volatility(&[7.0; 5]).unwrap(), 0.0);
        let mut v = vec![100.0];
        for k in 0..1000 {
            let r = if k % 2 == 0 { 0.01 } else { -0.01 };
            v.push(v[k] * (1.0 + r));
        }
        // sample std of n alternating +-0.01 is 0.01 * sqrt(n / (n - 1))
        let expected = 0.01 * (1000f64 / 999.0).sqrt() * 252f64.sqrt() * 100.0;
        assert!((volatility(&v).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 15.87).abs() < 0.02);
    }

    #[test]
    fn drawdown_examples() {
        assert_eq!(max_drawdown(&[100.0, 120.0, 90.0, 110.0]).unwrap(), -25.0);
        assert_eq!(max_drawdown(&[1.0, 2.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!(max_drawdown(&[5.0, 5.0]).unwrap().is_sign_positive());
        assert_eq!(max_drawdown(&[100.0, 50.0]).unwrap(), -50.0);
    }

    #[test]
    fn aggregate_examples() {
        let a = evaluate(&curve("a", &[100.0, 105.0, 110.0])).unwrap();
        assert_eq!(aggregate(std::slice::from_ref(&a)).unwrap().return_rate, a.return_rate);
        let b = evaluate(&curve("b", &[100.0, 110.0, 120.0])).unwrap();
        let m = aggregate(&[a.clone(), b]).unwrap();
        assert!((m.return_rate - 15.0).abs() < 1e-12);
        let other = evaluate(&curve("c", &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(matches!(aggregate(&[a, other]), Err(MetricsError::MismatchedPeriods(_))));
        assert!(matches!(aggregate(&[]), Err(MetricsError::Empty)));
    }

    #[test]
    fn report_and_table() {
        let curves = [curve("a", &[100.0, 105.0, 110.0]), curve("b", &[100.0, 110.0, 99.0])];
        let report = MetricsReport::from_curves("20-Day MA", "2020", Some(42), &curves).unwrap();
        assert_eq!(report.assets.len(), 2);
        assert!((report.pooled.return_rate - 4.5).abs() < 1e-12);
        let mut buf = Vec::new();
        write_table(&mut buf, &[report.row()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), TABLE_HEADER);
        assert!(text.lines().nth(1).unwrap().starts_with("2020,20-Day MA,4.50,"));
        let back: MetricsReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn strategy_names_with_commas_are_quoted() {
        let row = TableRow {
            year: "2021".into(),
            strategy: "MA, fast".into(),
            return_rate: 1.0,
            sharpe_ratio: 0.0,
            volatility: 0.0,
            max_drawdown: 0.0,
        };
        let mut buf = Vec::new();
        write_table(&mut buf, &[row]).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("2021,\"MA, fast\",1.00"));
    }

    fn positive_curve() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.5f64..2.0, 3..80).prop_map(|steps| {
            let mut v = vec![100.0];
            for s in steps {
                let last = *v.last().unwrap();
                v.push(last * s);
            }
            v
        })
    }

    proptest! {
        #[test]
        fn scale_invariance(v in positive_curve(), k in 0.01f64..100.0) {
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
            prop_assert!(close(total_return(&v).unwrap(), total_return(&scaled).unwrap()));
            prop_assert!(close(volatility(&v).unwrap(), volatility(&scaled).unwrap()));
            prop_assert!(close(sharpe(&v).unwrap().value, sharpe(&scaled).unwrap().value));
        }

        #[test]
        fn drawdown_bounds(v in positive_curve()) {
            let d = max_drawdown(&v).unwrap();
            prop_assert!((-100.0..=0.0).contains(&d));
        }

        #[test]
        fn aggregate_permutation_invariant(vals in prop::collection::vec(1.0f64..50.0, 1..8)) {
            let items: Vec<CurveMetrics> = vals
                .iter()
                .enumerate()
                .map(|(k, x)| evaluate(&curve(&k.to_string(), &[100.0, 100.0 + x, 100.0 + 2.0 * x])).unwrap())
                .collect();
            let mut rev = items.clone();
            rev.reverse();
            let a = aggregate(&items).unwrap();
            let b = aggregate(&rev).unwrap();
            prop_assert!((a.return_rate - b.return_rate).abs() < 1e-9);
            prop_assert!((a.sharpe_ratio - b.sharpe_ratio).abs() < 1e-9);
            prop_assert!((a.max_drawdown - b.max_drawdown).abs() < 1e-9);
        }
    }
}
