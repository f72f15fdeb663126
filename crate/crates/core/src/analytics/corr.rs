use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::catalog::Sector;
use crate::metrics::{
    disagreement_series, materialize, smoothed_pair, BeliefSeries, DailyAggregate, Group1, Group1Dim, Group2,
    Group2Dim, SmoothingConfig,
};

pub const DEFAULT_MIN_OVERLAP: usize = 10;

/// Pearson correlation over the days where both inputs are present.
///
/// Missing when fewer than `min_overlap` such days exist or either side is
/// constant on them.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>], min_overlap: usize) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "series must share a date index");
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    if pairs.len() < min_overlap.max(2) {
        return None;
    }
    let (x0, y0) = pairs[0];
    if pairs.iter().all(|p| p.0 == x0) || pairs.iter().all(|p| p.1 == y0) {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major, symmetric, unit diagonal; `None` where the pair lacks overlap.
    pub entries: Vec<Vec<Option<f64>>>,
    pub cutoff: NaiveDate,
    pub smoothed: bool,
    pub min_overlap: usize,
}

impl CorrelationMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.entries[i][j]
    }
}

/// Pairwise correlation of equally indexed series, labelled in input order.
pub fn correlation_matrix(
    labels: Vec<String>,
    series: &[Vec<Option<f64>>],
    cutoff: NaiveDate,
    smoothed: bool,
    min_overlap: usize,
) -> CorrelationMatrix {
    assert_eq!(labels.len(), series.len());
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let upper: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| pearson(&series[i], &series[j], min_overlap))
        .collect();
    let mut entries = vec![vec![None; n]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for (&(i, j), v) in pairs.iter().zip(upper) {
        entries[i][j] = v;
        entries[j][i] = v;
    }
    CorrelationMatrix {
        labels,
        entries,
        cutoff,
        smoothed,
        min_overlap,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EconomyState {
    pub name: String,
    pub cutoff: NaiveDate,
}

impl EconomyState {
    pub fn new(name: &str, cutoff: NaiveDate) -> Self {
        EconomyState {
            name: name.to_string(),
            cutoff,
        }
    }

    /// Market high, trough and end of sample.
    pub fn defaults() -> Vec<EconomyState> {
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).unwrap();
        vec![
            EconomyState::new("High", d(2, 19)),
            EconomyState::new("Low", d(3, 23)),
            EconomyState::new("Recovered", d(3, 31)),
        ]
    }

    pub fn slug(&self) -> String {
        self.name.to_ascii_lowercase().replace(' ', "_")
    }

    /// Cutoffs must be strictly increasing.
    pub fn validate(states: &[EconomyState]) -> Result<(), String> {
        match states.windows(2).find(|w| w[0].cutoff >= w[1].cutoff) {
            Some(w) => Err(format!(
                "state cutoffs must increase: {} ({}) is not before {} ({})",
                w[0].name, w[0].cutoff, w[1].name, w[1].cutoff
            )),
            None => Ok(()),
        }
    }
}

impl FromStr for EconomyState {
    type Err = String;

    /// `Name=YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, date) = s
            .split_once('=')
            .ok_or_else(|| format!("state {s:?} is not of the form Name=YYYY-MM-DD"))?;
        let cutoff = date
            .trim()
            .parse::<NaiveDate>()
            .map_err(|e| format!("state {s:?}: {e}"))?;
        Ok(EconomyState::new(name.trim(), cutoff))
    }
}

impl fmt::Display for EconomyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.name, self.cutoff)
    }
}

/// The grouping whose disagreement series are correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrDimension {
    Sector,
    Approach,
    HoldingPeriod,
    Experience,
}

impl CorrDimension {
    pub const ALL: [CorrDimension; 4] = [
        CorrDimension::Sector,
        CorrDimension::Approach,
        CorrDimension::HoldingPeriod,
        CorrDimension::Experience,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            CorrDimension::Sector => "sector",
            CorrDimension::Approach => "approach",
            CorrDimension::HoldingPeriod => "holding_period",
            CorrDimension::Experience => "experience",
        }
    }

    /// The aggregation these series are built from.
    pub fn dims(self) -> (Group1Dim, Group2Dim) {
        match self {
            CorrDimension::Sector => (Group1Dim::Sector, Group2Dim::AllInvestors),
            CorrDimension::Approach => (Group1Dim::AllFirms, Group2Dim::Approach),
            CorrDimension::HoldingPeriod => (Group1Dim::AllFirms, Group2Dim::HoldingPeriod),
            CorrDimension::Experience => (Group1Dim::AllFirms, Group2Dim::Experience),
        }
    }

    fn accepts(self, s: &BeliefSeries) -> bool {
        match (self, &s.key.group1, &s.key.group2) {
            (CorrDimension::Sector, Group1::Sector(sec), Group2::AllInvestors) => *sec != Sector::Unknown,
            (CorrDimension::Approach, Group1::AllFirms, g @ Group2::Approach(_))
            | (CorrDimension::HoldingPeriod, Group1::AllFirms, g @ Group2::HoldingPeriod(_))
            | (CorrDimension::Experience, Group1::AllFirms, g @ Group2::Experience(_)) => !g.is_unclassified(),
            _ => false,
        }
    }

    fn label(self, s: &BeliefSeries) -> String {
        match self {
            CorrDimension::Sector => s.key.group1.label(),
            _ => s.key.group2.label().to_string(),
        }
    }
}

impl FromStr for CorrDimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CorrDimension::ALL
            .into_iter()
            .find(|d| d.slug() == s)
            .ok_or_else(|| format!("unknown correlation dimension {s:?} (sector|approach|holding_period|experience)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrOptions {
    /// Trading days of the sample, ascending.
    pub days: Vec<NaiveDate>,
    pub smoothing: SmoothingConfig,
    pub min_overlap: usize,
}

/// Disagreement series per group of `dim` over `opts.days`, optionally
/// smoothed, then truncated at `cutoff`. Unknown sectors and unclassified
/// investor buckets are left out.
pub fn disagreement_by_group(
    aggs: &[DailyAggregate],
    dim: CorrDimension,
    cutoff: NaiveDate,
    smoothed: bool,
    opts: &CorrOptions,
) -> Result<Vec<(String, BeliefSeries)>, AnalyticsError> {
    let metric = |e: crate::metrics::MetricsError| AnalyticsError::InsufficientData(e.to_string());
    let mut out = Vec::new();
    for raw in materialize(aggs, &opts.days).into_iter().filter(|s| dim.accepts(s)) {
        let dis = if smoothed {
            smoothed_pair(&raw, &opts.smoothing).map_err(metric)?.1
        } else {
            disagreement_series(&raw).map_err(metric)?
        };
        out.push((dim.label(&raw), dis.truncate_after(cutoff)));
    }
    Ok(out)
}

pub fn disagreement_corr_matrix(
    aggs: &[DailyAggregate],
    dim: CorrDimension,
    state: &EconomyState,
    smoothed: bool,
    opts: &CorrOptions,
) -> Result<CorrelationMatrix, AnalyticsError> {
    let groups = disagreement_by_group(aggs, dim, state.cutoff, smoothed, opts)?;
    if let Some((label, _)) = groups.iter().find(|(_, s)| s.defined() == 0) {
        return Err(AnalyticsError::InsufficientData(format!(
            "{label} has no defined {} disagreement up to {}",
            if smoothed { "smoothed" } else { "daily" },
            state.cutoff
        )));
    }
    let (labels, series): (Vec<String>, Vec<Vec<Option<f64>>>) =
        groups.into_iter().map(|(l, s)| (l, s.values)).unzip();
    Ok(correlation_matrix(labels, &series, state.cutoff, smoothed, opts.min_overlap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn perfect_lines() {
        assert_eq!(pearson(&some(&[1., 2., 3.]), &some(&[2., 4., 6.]), 3), Some(1.0));
        assert_eq!(pearson(&some(&[1., 2., 3.]), &some(&[3., 2., 1.]), 3), Some(-1.0));
    }

    #[test]
    fn degenerate_cases_are_missing() {
        assert_eq!(pearson(&some(&[1., 2., 3.]), &some(&[2., 4., 6.]), 10), None);
        assert_eq!(pearson(&some(&[1., 1., 1.]), &some(&[2., 4., 6.]), 1), None);
        let x = vec![Some(1.0), None, Some(3.0), Some(4.0)];
        let y = vec![Some(1.0), Some(9.0), None, Some(2.0)];
        assert_eq!(pearson(&x, &y, 3), None);
        assert_eq!(pearson(&x, &y, 2), Some(1.0));
    }

    #[test]
    fn matrix_shape() {
        let d = NaiveDate::from_ymd_opt(2020, 2, 19).unwrap();
        let m = correlation_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            &[some(&[1., 2., 3., 5.]), some(&[1., 3., 2., 4.]), some(&[4., 3., 2., 1.])],
            d,
            false,
            2,
        );
        for i in 0..3 {
            assert_eq!(m.entries[i][i], Some(1.0));
            for j in 0..3 {
                assert_eq!(m.entries[i][j].map(f64::to_bits), m.entries[j][i].map(f64::to_bits));
            }
        }
        assert!(m.get("a", "c").unwrap() < 0.0);
        let single = correlation_matrix(vec!["a".into()], &[some(&[1.0])], d, false, 10);
        assert_eq!(single.entries, vec![vec![Some(1.0)]]);
    }

    #[test]
    fn states() {
        let s = EconomyState::defaults();
        assert!(EconomyState::validate(&s).is_ok());
        assert_eq!(s[1].slug(), "low");
        let parsed: EconomyState = "High=2020-02-19".parse().unwrap();
        assert_eq!(parsed, s[0]);
        assert!(EconomyState::validate(&[s[1].clone(), s[0].clone()]).is_err());
    }
}
