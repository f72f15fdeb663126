//! Descriptive statistics, frequency distributions, rolling diagnostics and
//! disagreement correlation matrices.

mod corpus;
mod corr;
mod hist;
mod rolling;
mod stats;
mod topk;

pub use corpus::{characterize, CorpusSummary, MessageDigest, StatsRow, SummaryBuilder, UserDistributions};
pub use corr::{
    correlation_matrix, disagreement_by_group, disagreement_corr_matrix, pearson, CorrDimension, CorrOptions,
    CorrelationMatrix, EconomyState, DEFAULT_MIN_OVERLAP,
};
pub use hist::{is_trading_hour, is_trading_weekday, time_histograms, TimeHistograms, TRADING_HOURS, WEEKDAY_NAMES};
pub use rolling::{decompose_stub, rolling_moments, RollingMoments};
pub use stats::{percentile, summary_from_frequencies, summary_stats, summary_stats_opt, SummaryStats};
pub use topk::{cashtag_counts, top_k, top_k_from_counts, RankedEntry, TopKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no values after dropping missing entries")]
    EmptyInput,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("bad window {0}: must be at least 2")]
    BadWindow(usize),
    #[error("not implemented: {0}")]
    NotImplemented(&'static str),
}
