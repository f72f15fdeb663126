//! Belief measurement over labeled investor message streams.
//!
//! The crate ingests StockTwits-style newline-delimited JSON, groups the
//! user-labeled bullish/bearish messages into `firm-group x trading-day x
//! investor-group` cells and derives:
//!
//! * average sentiment `(N_bull - N_bear) / (N_bull + N_bear)` per cell,
//! * disagreement `sqrt(1 - sentiment^2)` per cell,
//! * simple-moving-average smoothed series over trading days,
//! * descriptive statistics, frequency tables and histograms of the corpus,
//! * disagreement correlation matrices truncated at economy-state cutoffs.
//!
//! A seeded synthetic corpus generator ([`synth`]) produces corpora with a
//! known bullish-probability model so every statistic can be checked
//! against ground truth.

pub mod analytics;
pub mod catalog;
pub mod config;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use catalog::{Approach, Experience, HoldingPeriod, InvestorProfile, Sector, TickerCatalog};
pub use config::RunConfig;
pub use ingest::{RawMessage, SentimentLabel, Ticker, TradingCalendar};
pub use metrics::{avg_sentiment, disagreement, DailyAggregate, GroupKey};
