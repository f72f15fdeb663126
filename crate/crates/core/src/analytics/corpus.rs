//! Corpus characterization: coverage counts, user-level and text-feature
//! distributions, cashtag frequencies and posting-time histograms, all over
//! the unfiltered corpus.

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::hist::TimeHistograms;
use super::stats::{summary_from_frequencies, SummaryStats};
use super::AnalyticsError;
use crate::catalog::{profile_counts, profile_tables_from_counts, InvestorProfile, ProfileTable, UserIndex, UserRecord};
use crate::ingest::{text_features, RawMessage, SentimentLabel, Stopwords, TextFeatures, Ticker};
use crate::metrics::{AggregationContext, CellKey, CountCube, CubeStats};

/// Everything later stages need from one message, computed independently
/// per message so it can run inside the parallel ingest.
#[derive(Debug, Clone)]
pub struct MessageDigest {
    pub user_id: u64,
    pub user: UserRecord,
    pub created_at: DateTime<Utc>,
    /// `None` for a body without tokens.
    pub features: Option<TextFeatures>,
    pub cashtags: Vec<Ticker>,
    /// Trading day the message falls on, if inside the calendar.
    pub trading_day: Option<NaiveDate>,
    pub cell: Option<CellKey>,
    pub sentiment: SentimentLabel,
    pub cube_stats: CubeStats,
}

impl MessageDigest {
    pub fn new(m: &RawMessage, ctx: &AggregationContext<'_>, stopwords: &Stopwords) -> Self {
        let mut cube_stats = CubeStats::default();
        let cell = ctx.classify(m, &mut cube_stats);
        MessageDigest {
            user_id: m.user_id,
            user: UserRecord::from_message(m),
            created_at: m.created_at,
            features: text_features(&m.body, stopwords).ok(),
            cashtags: m.cashtags.clone(),
            trading_day: ctx.calendar.assign(m.created_at).ok(),
            cell,
            sentiment: m.sentiment,
            cube_stats,
        }
    }
}

/// Order-sensitive only in the sense that user profiles resolve by
/// timestamp; every other field is a commutative tally.
#[derive(Debug)]
pub struct SummaryBuilder {
    tz: Tz,
    users: UserIndex,
    cashtags: BTreeMap<Ticker, u64>,
    stock_days: HashMap<(Ticker, NaiveDate), u64>,
    words: BTreeMap<u32, u64>,
    chars: BTreeMap<u32, u64>,
    stopwords: BTreeMap<u32, u64>,
    n_cashtags: BTreeMap<u32, u64>,
    word_len: BTreeMap<(u32, u32), u64>,
    hist: TimeHistograms,
    per_day: BTreeMap<NaiveDate, u64>,
    n_messages: u64,
    out_of_calendar: u64,
    empty_bodies: u64,
    cube: CountCube,
    cube_stats: CubeStats,
}

impl SummaryBuilder {
    pub fn new(tz: Tz) -> Self {
        SummaryBuilder {
            tz,
            users: UserIndex::default(),
            cashtags: BTreeMap::new(),
            stock_days: HashMap::new(),
            words: BTreeMap::new(),
            chars: BTreeMap::new(),
            stopwords: BTreeMap::new(),
            n_cashtags: BTreeMap::new(),
            word_len: BTreeMap::new(),
            hist: TimeHistograms::default(),
            per_day: BTreeMap::new(),
            n_messages: 0,
            out_of_calendar: 0,
            empty_bodies: 0,
            cube: CountCube::default(),
            cube_stats: CubeStats::default(),
        }
    }

    pub fn push(&mut self, d: MessageDigest) {
        self.n_messages += 1;
        self.users.observe(d.user_id, d.user);
        self.hist.observe(d.created_at, self.tz);
        match d.trading_day {
            Some(day) => {
                *self.per_day.entry(day).or_default() += 1;
                for t in &d.cashtags {
                    *self.stock_days.entry((*t, day)).or_default() += 1;
                }
            }
            None => self.out_of_calendar += 1,
        }
        for t in &d.cashtags {
            *self.cashtags.entry(*t).or_default() += 1;
        }
        match d.features {
            Some(f) => {
                *self.words.entry(f.n_words).or_default() += 1;
                *self.chars.entry(f.n_chars).or_default() += 1;
                *self.stopwords.entry(f.n_stopwords).or_default() += 1;
                *self.n_cashtags.entry(f.n_cashtags).or_default() += 1;
                *self.word_len.entry((f.n_chars, f.n_words)).or_default() += 1;
            }
            None => self.empty_bodies += 1,
        }
        if let Some(cell) = d.cell {
            self.cube.observe(cell, d.sentiment);
        }
        self.cube_stats.merge(&d.cube_stats);
    }

    pub fn finish(self) -> (CorpusSummary, CountCube, CubeStats) {
        let mut per_stock: BTreeMap<u64, u64> = BTreeMap::new();
        for n in self.cashtags.values() {
            *per_stock.entry(*n).or_default() += 1;
        }
        let mut per_stock_day: BTreeMap<u64, u64> = BTreeMap::new();
        for n in self.stock_days.values() {
            *per_stock_day.entry(*n).or_default() += 1;
        }
        let mut user_dists = UserDistributions::default();
        for r in self.users.users.values() {
            *user_dists.messages.entry(r.n_messages as i64).or_default() += 1;
            *user_dists.followers.entry(r.followers).or_default() += 1;
            *user_dists.following.entry(r.following).or_default() += 1;
            *user_dists.ideas.entry(r.ideas as i64).or_default() += 1;
            *user_dists.likes.entry(r.likes as i64).or_default() += 1;
            if r.followers < 0 || r.following < 0 {
                user_dists.negative_counts += 1;
            }
        }
        let summary = CorpusSummary {
            n_messages: self.n_messages,
            n_users: self.users.users.len() as u64,
            n_tickers: self.cashtags.len() as u64,
            n_stock_days: self.stock_days.len() as u64,
            out_of_calendar: self.out_of_calendar,
            empty_bodies: self.empty_bodies,
            cashtags: self.cashtags,
            messages_per_stock: per_stock,
            messages_per_stock_day: per_stock_day,
            users: user_dists,
            words: self.words,
            chars: self.chars,
            stopwords: self.stopwords,
            n_cashtags: self.n_cashtags,
            word_len: self.word_len.into_iter().map(|((c, w), n)| (c, w, n)).collect(),
            hist: self.hist,
            per_day: self.per_day,
            profiles: profile_counts(&self.users).into_iter().map(|(p, (u, m))| (p, u, m)).collect(),
        };
        (summary, self.cube, self.cube_stats)
    }
}

/// Value -> number of users, per account attribute (latest snapshot).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserDistributions {
    pub messages: BTreeMap<i64, u64>,
    pub followers: BTreeMap<i64, u64>,
    pub following: BTreeMap<i64, u64>,
    pub ideas: BTreeMap<i64, u64>,
    pub likes: BTreeMap<i64, u64>,
    /// Users whose latest snapshot has negative followers or following.
    pub negative_counts: u64,
}

/// Serializable characterization of a whole corpus. Distributions are kept
/// as value -> multiplicity maps so exact statistics can be recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_messages: u64,
    pub n_users: u64,
    pub n_tickers: u64,
    pub n_stock_days: u64,
    pub out_of_calendar: u64,
    pub empty_bodies: u64,
    pub cashtags: BTreeMap<Ticker, u64>,
    pub messages_per_stock: BTreeMap<u64, u64>,
    pub messages_per_stock_day: BTreeMap<u64, u64>,
    pub users: UserDistributions,
    pub words: BTreeMap<u32, u64>,
    pub chars: BTreeMap<u32, u64>,
    pub stopwords: BTreeMap<u32, u64>,
    pub n_cashtags: BTreeMap<u32, u64>,
    /// `(word characters, words, messages)`.
    pub word_len: Vec<(u32, u32, u64)>,
    pub hist: TimeHistograms,
    /// Messages per trading day, unfiltered.
    pub per_day: BTreeMap<NaiveDate, u64>,
    /// `(profile, users, messages)` under each user's latest profile.
    pub profiles: Vec<(InvestorProfile, u64, u64)>,
}

/// One labelled row of a descriptive-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub label: String,
    pub stats: SummaryStats,
}

fn freq_rows<K: Copy + Into<f64>>(label: &str, m: &BTreeMap<K, u64>) -> Option<StatsRow> {
    let pairs: Vec<(f64, u64)> = m.iter().map(|(k, n)| ((*k).into(), *n)).collect();
    summary_from_frequencies(&pairs).ok().map(|stats| StatsRow {
        label: label.to_string(),
        stats,
    })
}

fn i64_rows(label: &str, m: &BTreeMap<i64, u64>) -> Option<StatsRow> {
    let pairs: Vec<(f64, u64)> = m.iter().map(|(k, n)| (*k as f64, *n)).collect();
    summary_from_frequencies(&pairs).ok().map(|stats| StatsRow {
        label: label.to_string(),
        stats,
    })
}

fn u64_rows(label: &str, m: &BTreeMap<u64, u64>) -> Option<StatsRow> {
    let pairs: Vec<(f64, u64)> = m.iter().map(|(k, n)| (*k as f64, *n)).collect();
    summary_from_frequencies(&pairs).ok().map(|stats| StatsRow {
        label: label.to_string(),
        stats,
    })
}

impl CorpusSummary {
    pub fn empty(tz: Tz) -> Self {
        SummaryBuilder::new(tz).finish().0
    }

    /// Coverage and user-level characteristics. Rows without data are omitted.
    pub fn user_characteristics(&self) -> Vec<StatsRow> {
        [
            u64_rows("Number of messages per stock", &self.messages_per_stock),
            i64_rows("Number of messages per user", &self.users.messages),
            u64_rows("Number of messages per stock per day", &self.messages_per_stock_day),
            i64_rows("Number of followers user has", &self.users.followers),
            i64_rows("Number of people user follows", &self.users.following),
            i64_rows("Number of ideas user has", &self.users.ideas),
            i64_rows("Number of likes user has", &self.users.likes),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    /// Per-message text feature distributions.
    pub fn message_features(&self) -> Vec<StatsRow> {
        let mut pairs: Vec<(f64, u64)> = Vec::new();
        for &(c, w, n) in &self.word_len {
            pairs.push((c as f64 / w as f64, n));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, u64)> = Vec::with_capacity(pairs.len());
        for (x, n) in pairs {
            match merged.last_mut() {
                Some((y, m)) if *y == x => *m += n,
                _ => merged.push((x, n)),
            }
        }
        let word_len = summary_from_frequencies(&merged).ok().map(|stats| StatsRow {
            label: "Average word's length per message".into(),
            stats,
        });
        [
            freq_rows("Number of words per message", &self.words),
            freq_rows("Number of characters per message", &self.chars),
            word_len,
            freq_rows("Number of stopwords per message", &self.stopwords),
            freq_rows("Number of cashtags per message", &self.n_cashtags),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    pub fn profile_tables(&self) -> [ProfileTable; 3] {
        profile_tables_from_counts(&self.profiles.iter().map(|(p, u, m)| (*p, (*u, *m))).collect())
    }

    pub fn mean_words(&self) -> Result<f64, AnalyticsError> {
        let pairs: Vec<(f64, u64)> = self.words.iter().map(|(k, n)| (*k as f64, *n)).collect();
        Ok(summary_from_frequencies(&pairs)?.mean)
    }
}

/// Single-threaded characterization of an in-memory corpus.
pub fn characterize(
    messages: &[RawMessage],
    ctx: &AggregationContext<'_>,
    stopwords: &Stopwords,
) -> (CorpusSummary, CountCube, CubeStats) {
    let mut b = SummaryBuilder::new(ctx.calendar.tz());
    for m in messages {
        b.push(MessageDigest::new(m, ctx, stopwords));
    }
    b.finish()
}
