use super::{DataError, DateRange, MarketFrame, Result};
use chrono::NaiveDate;
use std::ops::Range;

/// A date-indexed table whose rows can be sliced by calendar position.
pub trait DateIndexed: Sized {
    fn calendar(&self) -> &[NaiveDate];
    fn slice_rows(&self, rows: Range<usize>) -> Self;
}

impl DateIndexed for MarketFrame {
    fn calendar(&self) -> &[NaiveDate] {
        &self.calendar
    }

    fn slice_rows(&self, rows: Range<usize>) -> Self {
        let mut out = self.clone();
        out.calendar = self.calendar[rows.clone()].to_vec();
        for s in &mut out.series {
            s.bars = s.bars[rows.clone()].to_vec();
        }
        out
    }
}

/// Row positions of `calendar` (sorted ascending) that fall inside `range`.
pub fn index_range(calendar: &[NaiveDate], range: DateRange) -> Option<Range<usize>> {
    let lo = calendar.partition_point(|d| *d < range.start);
    let hi = calendar.partition_point(|d| *d <= range.end);
    (lo < hi).then_some(lo..hi)
}

/// Cut a frame into chronologically ordered, disjoint train and test parts.
pub fn split_by_date<T: DateIndexed>(frame: &T, train: DateRange, test: DateRange) -> Result<(T, T)> {
    if train.end >= test.start {
        return Err(DataError::OverlappingSplit {
            train_end: train.end,
            test_start: test.start,
        });
    }
    let cal = frame.calendar();
    let train_rows = index_range(cal, train).ok_or(DataError::EmptySplit("train"))?;
    let test_rows = index_range(cal, test).ok_or(DataError::EmptySplit("test"))?;
    Ok((frame.slice_rows(train_rows), frame.slice_rows(test_rows)))
}
