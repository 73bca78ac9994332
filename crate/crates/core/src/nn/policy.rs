//! Categorical policy helpers over a logit vector.

use super::{NnError, Result};
use rand::Rng;

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() || logits.iter().any(|z| !z.is_finite()) {
        return Err(NnError::NonFinite("logits".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

pub fn log_softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() || logits.iter().any(|z| !z.is_finite()) {
        return Err(NnError::NonFinite("logits".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    Ok(logits.iter().map(|z| z - lse).collect())
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Inverse-CDF draw. Returns the index and its log-probability.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<(usize, f64)> {
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(NnError::DegenerateDistribution);
    }
    let target = rng.random::<f64>() * total;
    let mut cum = 0.0;
    let mut chosen = None;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if cum > target {
            chosen = Some(i);
            break;
        }
    }
    // rounding can leave target just above the final cumulative sum
    let i = chosen.unwrap_or_else(|| probs.iter().rposition(|p| *p > 0.0).unwrap_or(0));
    Ok((i, (probs[i] / total).ln()))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
