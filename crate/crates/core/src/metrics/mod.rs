//! Sentiment, disagreement, grouped daily aggregation and SMA smoothing.

mod aggregate;
mod group;
mod series;

pub use aggregate::{aggregate, AggregationContext, CellKey, CountCube, Counts, CubeStats, DailyAggregate};
pub use group::{Group1, Group1Dim, Group2, Group2Dim, GroupKey};
pub use series::{
    disagreement_series, materialize, sma, smoothed_pair, BeliefSeries, SeriesKind, Smoothing, SmoothingConfig,
    SmoothingOrder, WindowMode,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no classified messages in bucket")]
    EmptyBucket,
    #[error("sentiment {0} outside [-1, 1]")]
    DomainError(f64),
    #[error("bad window: k={window}, min_obs={min_obs}")]
    BadWindow { window: usize, min_obs: usize },
    #[error("expected a {expected:?} series, got {got:?}")]
    KindMismatch { expected: SeriesKind, got: SeriesKind },
    #[error("series is already smoothed")]
    AlreadySmoothed,
}

/// `(bullish - bearish) / (bullish + bearish)`.
pub fn avg_sentiment(n_bullish: u64, n_bearish: u64) -> Result<f64, MetricsError> {
    let total = n_bullish + n_bearish;
    if total == 0 {
        return Err(MetricsError::EmptyBucket);
    }
    Ok((n_bullish as f64 - n_bearish as f64) / total as f64)
}

/// `sqrt(1 - s^2)`: the population standard deviation of +/-1 labels averaging to `s`.
pub fn disagreement(s: f64) -> Result<f64, MetricsError> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(MetricsError::DomainError(s));
    }
    Ok((1.0 - s * s).sqrt())
}
