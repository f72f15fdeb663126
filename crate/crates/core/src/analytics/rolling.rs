use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::metrics::BeliefSeries;

/// Trailing-window mean and sample std, one entry per day of the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingMoments {
    pub window: usize,
    pub days: Vec<NaiveDate>,
    pub mean: Vec<Option<f64>>,
    pub std: Vec<Option<f64>>,
}

/// Moments over the present values among days `t-k+1 ..= t`. The mean needs
/// one value, the std two.
pub fn rolling_moments(series: &BeliefSeries, window: usize) -> Result<RollingMoments, AnalyticsError> {
    if window < 2 {
        return Err(AnalyticsError::BadWindow(window));
    }
    let n = series.values.len();
    let mut mean = Vec::with_capacity(n);
    let mut std = Vec::with_capacity(n);
    let mut buf: Vec<f64> = Vec::with_capacity(window);
    for t in 0..n {
        buf.clear();
        buf.extend(series.values[(t + 1).saturating_sub(window)..=t].iter().flatten());
        if buf.is_empty() {
            mean.push(None);
            std.push(None);
            continue;
        }
        let m = buf.iter().sum::<f64>() / buf.len() as f64;
        mean.push(Some(m));
        std.push((buf.len() >= 2).then(|| {
            let ss: f64 = buf.iter().map(|x| (x - m).powi(2)).sum();
            (ss / (buf.len() - 1) as f64).sqrt()
        }));
    }
    Ok(RollingMoments {
        window,
        days: series.days.clone(),
        mean,
        std,
    })
}

/// Reserved interface for a trend + seasonal + residual decomposition of a
/// belief series. Estimation is out of scope; this always fails.
pub fn decompose_stub(_series: &BeliefSeries) -> Result<(), AnalyticsError> {
    Err(AnalyticsError::NotImplemented(
        "trend/seasonal decomposition is not estimated; see the README section on scope",
    ))
}
