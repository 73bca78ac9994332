use super::{DataError, Result};
use serde::{Deserialize, Serialize};

/// Column-wise mean and population standard deviation of a row-major matrix.
///
/// For a feature frame the matrix is `T x (N*F)`, so every (asset, feature)
/// pair gets its own statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Fit on `values` laid out as rows of `width` entries.
    pub fn fit(values: &[f64], width: usize) -> Result<Self> {
        if width == 0 || !values.len().is_multiple_of(width) {
            return Err(DataError::DimensionMismatch {
                expected: width,
                found: values.len(),
            });
        }
        let rows = values.len() / width;
        if rows == 0 {
            return Err(DataError::EmptySplit("normalization"));
        }
        let mut mean = vec![0.0; width];
        for row in values.chunks_exact(width) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= rows as f64);
        let mut var = vec![0.0; width];
        for row in values.chunks_exact(width) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / rows as f64).sqrt()).collect();
        Ok(Self { mean, std })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    /// Columns with zero spread; they normalize to 0.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.std
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn denormalize(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check(values)?;
        Ok(values
            .chunks_exact(self.width())
            .flat_map(|row| {
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.std)
                    .map(|((z, m), s)| z * s + m)
            })
            .collect())
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if self.width() == 0 || !values.len().is_multiple_of(self.width()) {
            return Err(DataError::DimensionMismatch {
                expected: self.width(),
                found: values.len(),
            });
        }
        Ok(())
    }
}

/// `(v - mean) / std` per column; zero-spread columns map to 0.
pub fn zscore(values: &[f64], stats: &NormStats) -> Result<Vec<f64>> {
    stats.check(values)?;
    Ok(values
        .chunks_exact(stats.width())
        .flat_map(|row| {
            row.iter()
                .zip(&stats.mean)
                .zip(&stats.std)
                .map(|((v, m), s)| if *s == 0.0 { 0.0 } else { (v - m) / s })
        })
        .collect())
}
