//! Descriptive statistics with linear-interpolation (type 7) percentiles.

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: u64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

/// Interpolates between adjacent order statistics, never overshooting `b`.
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (a + t * (b - a)).min(b)
}

/// Percentile `p` in `[0, 1]` of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    lerp(sorted[lo], sorted[hi], h - lo as f64)
}

/// Statistics of the finite values in `values`; NaNs count as missing.
pub fn summary_stats(values: &[f64]) -> Result<SummaryStats, AnalyticsError> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    let mut pairs: Vec<(f64, u64)> = Vec::new();
    for x in v {
        match pairs.last_mut() {
            Some((last, c)) if *last == x => *c += 1,
            _ => pairs.push((x, 1)),
        }
    }
    summary_from_frequencies(&pairs)
}

pub fn summary_stats_opt(values: &[Option<f64>]) -> Result<SummaryStats, AnalyticsError> {
    let v: Vec<f64> = values.iter().flatten().copied().collect();
    summary_stats(&v)
}

/// Statistics of a multiset given as ascending `(value, multiplicity)` pairs.
pub fn summary_from_frequencies(pairs: &[(f64, u64)]) -> Result<SummaryStats, AnalyticsError> {
    let pairs: Vec<(f64, u64)> = pairs.iter().copied().filter(|(_, c)| *c > 0).collect();
    let n: u64 = pairs.iter().map(|(_, c)| c).sum();
    if n == 0 {
        return Err(AnalyticsError::EmptyInput);
    }
    debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0), "pairs must be ascending");
    let mut cum = Vec::with_capacity(pairs.len());
    let mut acc = 0u64;
    for (_, c) in &pairs {
        acc += c;
        cum.push(acc);
    }
    // Value at 0-based position j of the expanded sorted sequence.
    let nth = |j: u64| pairs[cum.partition_point(|&c| c <= j)].0;
    let quantile = |p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as u64;
        let hi = (lo + 1).min(n - 1);
        let (a, b) = (nth(lo), nth(hi));
        lerp(a, b, h - lo as f64)
    };
    let mean = pairs.iter().map(|(x, c)| x * *c as f64).sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = pairs.iter().map(|(x, c)| (x - mean).powi(2) * *c as f64).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SummaryStats {
        count: n,
        mean,
        std,
        min: pairs[0].0,
        p25: quantile(0.25),
        p50: quantile(0.5),
        p75: quantile(0.75),
        max: pairs[pairs.len() - 1].0,
    })
}
