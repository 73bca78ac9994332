use super::{AssetSeries, Bar, DataError, DateRange, MarketFrame, Result};
use chrono::NaiveDate;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

const REQUIRED: [&str; 7] = ["date", "ticker", "open", "high", "low", "close", "volume"];

#[derive(Debug, Deserialize)]
struct Row {
    date: String,
    ticker: String,
    open: Option<f64>,
    high: Option<f64>,
    low: Option<f64>,
    close: Option<f64>,
    volume: Option<f64>,
}

fn price(v: Option<f64>) -> f64 {
    match v {
        Some(p) if p.is_finite() && p > 0.0 => p,
        _ => f64::NAN,
    }
}

fn volume(v: Option<f64>) -> f64 {
    match v {
        Some(q) if q.is_finite() && q >= 0.0 => q,
        _ => f64::NAN,
    }
}

/// Load `date,ticker,open,high,low,close,volume` rows from a CSV file.
/// Lines starting with `#` are ignored.
///
/// An empty `tickers` list selects every ticker in the file, in first-seen
/// order. The result is aligned to the union of the selected tickers' trading
/// dates inside `range`; absent cells (empty fields, non-positive prices,
/// dates an asset did not trade) are `NaN` until [`super::clean`] runs.
pub fn load_ohlcv(path: impl AsRef<Path>, tickers: &[String], range: DateRange) -> Result<MarketFrame> {
    let path = path.as_ref();
    if range.is_empty() {
        return Err(DataError::EmptyRange {
            start: range.start,
            end: range.end,
        });
    }
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(file);

    let bad_row = |line: u64, message: String| DataError::BadRow {
        path: path.to_path_buf(),
        line,
        message,
    };

    let headers = reader
        .headers()
        .map_err(|e| bad_row(1, e.to_string()))?
        .clone();
    for column in REQUIRED {
        if !headers.iter().any(|h| h == column) {
            return Err(DataError::MissingColumn {
                path: path.to_path_buf(),
                column,
            });
        }
    }

    let mut seen_order: Vec<String> = Vec::new();
    let mut by_ticker: BTreeMap<String, BTreeMap<NaiveDate, Bar>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            bad_row(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| bad_row(line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
            .map_err(|e| bad_row(line, format!("bad date `{}`: {e}", row.date)))?;
        if !by_ticker.contains_key(&row.ticker) {
            seen_order.push(row.ticker.clone());
        }
        let entry = by_ticker.entry(row.ticker.clone()).or_default();
        if !range.contains(date) {
            continue;
        }
        let bar = Bar {
            date,
            open: price(row.open),
            high: price(row.high),
            low: price(row.low),
            close: price(row.close),
            volume: volume(row.volume),
        };
        if entry.insert(date, bar).is_some() {
            return Err(DataError::DuplicateRow {
                path: path.to_path_buf(),
                line,
                ticker: row.ticker,
                date,
            });
        }
    }

    let selected: Vec<String> = if tickers.is_empty() {
        seen_order
    } else {
        tickers.to_vec()
    };
    for t in &selected {
        if !by_ticker.contains_key(t) {
            return Err(DataError::UnknownTicker(t.clone()));
        }
    }

    let calendar: Vec<NaiveDate> = selected
        .iter()
        .flat_map(|t| by_ticker[t].keys().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if calendar.is_empty() {
        return Err(DataError::EmptyRange {
            start: range.start,
            end: range.end,
        });
    }

    let series = selected
        .iter()
        .map(|t| {
            let rows = &by_ticker[t];
            let bars = calendar
                .iter()
                .map(|d| rows.get(d).copied().unwrap_or_else(|| Bar::missing(*d)))
                .collect();
            AssetSeries::new(t.clone(), bars)
        })
        .collect();

    Ok(MarketFrame {
        tickers: selected,
        calendar,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn all() -> DateRange {
        DateRange::new(
            NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2100, 1, 1).unwrap(),
        )
    }

    const TWO_BY_FIVE: &str = "date,ticker,open,high,low,close,volume
2020-01-02,AAA,10,11,9,10.5,100
2020-01-03,AAA,10.5,11,10,10.8,120
2020-01-06,AAA,10.8,12,10.5,11.9,90
2020-01-07,AAA,11.9,12,11,11.2,80
2020-01-08,AAA,11.2,11.5,11,11.4,70
2020-01-02,BBB,50,51,49,50.5,10
2020-01-03,BBB,50.5,52,50,51.8,11
2020-01-06,BBB,51.8,52,50.5,50.9,12
2020-01-07,BBB,50.9,51,49.5,50.0,13
2020-01-08,BBB,50.0,50.5,49.8,50.2,14
";

    #[test]
    fn loads_two_tickers() {
        let f = write_csv(TWO_BY_FIVE);
        let frame = load_ohlcv(f.path(), &["AAA".into(), "BBB".into()], all()).unwrap();
        assert_eq!(frame.num_assets(), 2);
        assert_eq!(frame.len(), 5);
        assert_eq!(frame.series[1].bars[2].close, 50.9);
    }

    #[test]
    fn unknown_ticker() {
        let f = write_csv(TWO_BY_FIVE);
        let err = load_ohlcv(f.path(), &["ZZZZ".into()], all()).unwrap_err();
        assert!(matches!(err, DataError::UnknownTicker(t) if t == "ZZZZ"));
    }

    #[test]
    fn missing_file() {
        let err = load_ohlcv("/nonexistent/prices.csv", &[], all()).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn empty_date_range() {
        let f = write_csv(TWO_BY_FIVE);
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).unwrap();
        let inverted = DateRange::new(d(2, 1), d(1, 1));
        assert!(matches!(
            load_ohlcv(f.path(), &[], inverted),
            Err(DataError::EmptyRange { .. })
        ));
        let outside = DateRange::new(d(6, 1), d(7, 1));
        assert!(matches!(
            load_ohlcv(f.path(), &[], outside),
            Err(DataError::EmptyRange { .. })
        ));
    }

    #[test]
    fn unsorted_rows_come_out_sorted() {
        let mut lines: Vec<&str> = TWO_BY_FIVE.lines().collect();
        let header = lines.remove(0);
        lines.reverse();
        lines.swap(1, 7);
        let body = format!("{header}\n{}\n", lines.join("\n"));
        let f = write_csv(&body);
        let frame = load_ohlcv(f.path(), &["AAA".into(), "BBB".into()], all()).unwrap();

        let sorted = write_csv(TWO_BY_FIVE);
        let expected = load_ohlcv(sorted.path(), &["AAA".into(), "BBB".into()], all()).unwrap();
        assert_eq!(frame, expected);
        assert!(frame.calendar.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn extra_columns_and_blank_cells() {
        let f = write_csv(
            "adj,date,ticker,open,high,low,close,volume,note\n\
             1,2020-01-02,AAA,10,11,9,10.5,100,x\n\
             1,2020-01-03,AAA,,,,,,y\n",
        );
        let frame = load_ohlcv(f.path(), &[], all()).unwrap();
        assert_eq!(frame.len(), 2);
        assert!(frame.series[0].bars[1].close.is_nan());
        assert!(frame.series[0].bars[1].volume.is_nan());
    }

    #[test]
    fn corrupted_row_names_line() {
        let f = write_csv(
            "date,ticker,open,high,low,close,volume\n\
             2020-01-02,AAA,10,11,9,10.5,100\n\
             2020-01-03,AAA,10,eleven,9,10.5,100\n",
        );
        match load_ohlcv(f.path(), &[], all()).unwrap_err() {
            DataError::BadRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn union_calendar_marks_gaps() {
        let f = write_csv(
            "date,ticker,open,high,low,close,volume\n\
             2020-01-02,AAA,1,1,1,1,1\n\
             2020-01-03,BBB,2,2,2,2,2\n",
        );
        let frame = load_ohlcv(f.path(), &[], all()).unwrap();
        assert_eq!(frame.len(), 2);
        assert!(frame.series[0].bars[1].close.is_nan());
        assert!(frame.series[1].bars[0].close.is_nan());
    }
}
