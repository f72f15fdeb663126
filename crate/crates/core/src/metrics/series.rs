//! Date-indexed belief series and simple moving averages.

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::aggregate::DailyAggregate;
use super::group::GroupKey;
use super::{disagreement, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    Sentiment,
    Disagreement,
}

impl SeriesKind {
    fn range(self) -> (f64, f64) {
        match self {
            SeriesKind::Sentiment => (-1.0, 1.0),
            SeriesKind::Disagreement => (0.0, 1.0),
        }
    }
}

/// Which past days feed the average at day `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Days `t-1 ..= t-k`; day `t` itself is excluded.
    #[default]
    Lagged,
    /// Days `t-k+1 ..= t`.
    Trailing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    None,
    Sma {
        window: usize,
        min_obs: usize,
        mode: WindowMode,
    },
}

/// Whether the smoothed disagreement is derived from smoothed sentiment
/// (default) or by smoothing the raw disagreement series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingOrder {
    #[default]
    SentimentFirst,
    DisagreementFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub window: usize,
    pub min_obs: usize,
    pub order: SmoothingOrder,
    pub mode: WindowMode,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            window: 7,
            min_obs: 1,
            order: SmoothingOrder::SentimentFirst,
            mode: WindowMode::Lagged,
        }
    }
}

/// Values on consecutive trading days; `None` marks a day without data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSeries {
    pub key: GroupKey,
    pub kind: SeriesKind,
    pub smoothing: Smoothing,
    pub days: Vec<NaiveDate>,
    pub values: Vec<Option<f64>>,
}

impl BeliefSeries {
    pub fn new(key: GroupKey, kind: SeriesKind, days: Vec<NaiveDate>, values: Vec<Option<f64>>) -> Self {
        assert_eq!(days.len(), values.len(), "one value per day");
        BeliefSeries {
            key,
            kind,
            smoothing: Smoothing::None,
            days,
            values,
        }
    }

    pub fn get(&self, day: NaiveDate) -> Option<f64> {
        self.days
            .binary_search(&day)
            .ok()
            .and_then(|i| self.values[i])
    }

    pub fn defined(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Keeps days `<= cutoff`.
    pub fn truncate_after(&self, cutoff: NaiveDate) -> BeliefSeries {
        let n = self.days.partition_point(|d| *d <= cutoff);
        BeliefSeries {
            days: self.days[..n].to_vec(),
            values: self.values[..n].to_vec(),
            ..self.clone()
        }
    }
}

/// Builds one sentiment series per group key over `days`. Days without an
/// aggregate are missing; aggregates on days not listed are dropped.
pub fn materialize(aggs: &[DailyAggregate], days: &[NaiveDate]) -> Vec<BeliefSeries> {
    let index: HashMap<NaiveDate, usize> = days.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let mut by_key: Vec<(GroupKey, Vec<Option<f64>>)> = Vec::new();
    let mut slot: HashMap<&GroupKey, usize> = HashMap::new();
    for a in aggs {
        let Some(&i) = index.get(&a.day) else { continue };
        let s = *slot.entry(&a.key).or_insert_with(|| {
            by_key.push((a.key.clone(), vec![None; days.len()]));
            by_key.len() - 1
        });
        by_key[s].1[i] = a.avg_sentiment;
    }
    by_key.sort_by(|a, b| a.0.cmp(&b.0));
    by_key
        .into_iter()
        .map(|(key, values)| BeliefSeries::new(key, SeriesKind::Sentiment, days.to_vec(), values))
        .collect()
}

/// Simple moving average over `window` trading days (positions in the
/// series), emitting a value only where at least `min_obs` of them are present.
pub fn sma(series: &BeliefSeries, window: usize, min_obs: usize, mode: WindowMode) -> Result<BeliefSeries, MetricsError> {
    if window < 1 || min_obs < 1 || min_obs > window {
        return Err(MetricsError::BadWindow { window, min_obs });
    }
    if series.smoothing != Smoothing::None {
        return Err(MetricsError::AlreadySmoothed);
    }
    let lag = match mode {
        WindowMode::Lagged => 1,
        WindowMode::Trailing => 0,
    };
    let (lo_bound, hi_bound) = series.kind.range();
    let v = &series.values;
    let mut out = Vec::with_capacity(v.len());
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for i in 0..v.len() {
        // Window for position i is [i - lag - window + 1, i - lag].
        if let Some(leaving) = (i + 1).checked_sub(lag + window + 1) {
            if let Some(x) = v[leaving] {
                sum -= x;
                count -= 1;
                if count == 0 {
                    sum = 0.0;
                }
            }
        }
        if let Some(entering) = i.checked_sub(lag) {
            if let Some(x) = v[entering] {
                sum += x;
                count += 1;
            }
        }
        out.push((count >= min_obs).then(|| (sum / count as f64).clamp(lo_bound, hi_bound)));
    }
    Ok(BeliefSeries {
        key: series.key.clone(),
        kind: series.kind,
        smoothing: Smoothing::Sma { window, min_obs, mode },
        days: series.days.clone(),
        values: out,
    })
}

/// Pointwise `sqrt(1 - s^2)`; keeps the input's smoothing tag.
pub fn disagreement_series(sent: &BeliefSeries) -> Result<BeliefSeries, MetricsError> {
    if sent.kind != SeriesKind::Sentiment {
        return Err(MetricsError::KindMismatch {
            expected: SeriesKind::Sentiment,
            got: sent.kind,
        });
    }
    let values = sent
        .values
        .iter()
        .map(|v| v.map(disagreement).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BeliefSeries {
        kind: SeriesKind::Disagreement,
        values,
        ..sent.clone()
    })
}

/// Smoothed (sentiment, disagreement) for a raw sentiment series.
pub fn smoothed_pair(raw: &BeliefSeries, cfg: &SmoothingConfig) -> Result<(BeliefSeries, BeliefSeries), MetricsError> {
    let sent = sma(raw, cfg.window, cfg.min_obs, cfg.mode)?;
    let dis = match cfg.order {
        SmoothingOrder::SentimentFirst => disagreement_series(&sent)?,
        SmoothingOrder::DisagreementFirst => sma(&disagreement_series(raw)?, cfg.window, cfg.min_obs, cfg.mode)?,
    };
    Ok((sent, dis))
}
