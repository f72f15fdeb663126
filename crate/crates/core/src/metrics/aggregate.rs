//! Grouped daily bullish/bearish counts.
//!
//! Counts are first tallied into a [`CountCube`] at the finest grain
//! (trading day x ticker x investor profile). Every `group1 x day x group2`
//! table is a roll-up of that cube. Cubes merge by pointwise addition, so
//! shard-partial cubes combine in any order to the same result.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::ops::{Add, AddAssign};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::group::{Group1, Group1Dim, Group2Dim, GroupKey};
use super::{avg_sentiment, disagreement};
use crate::catalog::{Approach, Category, Experience, HoldingPeriod, InvestorProfile, Sector, TickerCatalog};
use crate::ingest::{filter_for_sentiment, RawMessage, SentimentLabel, Ticker, TradingCalendar};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub bullish: u64,
    pub bearish: u64,
}

impl Counts {
    pub fn of(label: SentimentLabel) -> Counts {
        match label {
            SentimentLabel::Bullish => Counts { bullish: 1, bearish: 0 },
            SentimentLabel::Bearish => Counts { bullish: 0, bearish: 1 },
            SentimentLabel::Unclassified => Counts::default(),
        }
    }

    pub fn total(self) -> u64 {
        self.bullish + self.bearish
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, rhs: Counts) -> Counts {
        Counts {
            bullish: self.bullish + rhs.bullish,
            bearish: self.bearish + rhs.bearish,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        *self = *self + rhs;
    }
}

/// One `group1 x day x group2` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyAggregate {
    pub key: GroupKey,
    pub day: NaiveDate,
    pub n_bullish: u64,
    pub n_bearish: u64,
    /// Missing iff the cell has no classified messages.
    pub avg_sentiment: Option<f64>,
    pub disagreement: Option<f64>,
}

impl DailyAggregate {
    pub fn from_counts(key: GroupKey, day: NaiveDate, c: Counts) -> Self {
        let avg = avg_sentiment(c.bullish, c.bearish).ok();
        DailyAggregate {
            key,
            day,
            n_bullish: c.bullish,
            n_bearish: c.bearish,
            avg_sentiment: avg,
            disagreement: avg.map(|s| disagreement(s).expect("count ratio lies in [-1, 1]")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub day: NaiveDate,
    pub ticker: Ticker,
    pub profile: InvestorProfile,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountCube {
    cells: HashMap<CellKey, Counts>,
}

const CUBE_HEADER: [&str; 7] = [
    "day",
    "ticker",
    "approach",
    "holding_period",
    "experience",
    "n_bullish",
    "n_bearish",
];

impl CountCube {
    pub fn add(&mut self, key: CellKey, counts: Counts) {
        *self.cells.entry(key).or_default() += counts;
    }

    pub fn observe(&mut self, key: CellKey, label: SentimentLabel) {
        if label.is_classified() {
            self.add(key, Counts::of(label));
        }
    }

    pub fn merge(&mut self, other: &CountCube) {
        for (k, c) in &other.cells {
            self.add(*k, *c);
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total(&self) -> Counts {
        self.cells.values().fold(Counts::default(), |a, b| a + *b)
    }

    pub fn get(&self, key: &CellKey) -> Option<Counts> {
        self.cells.get(key).copied()
    }

    pub fn sorted(&self) -> Vec<(CellKey, Counts)> {
        let mut v: Vec<_> = self.cells.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn days(&self) -> Vec<NaiveDate> {
        let mut d: Vec<_> = self.cells.keys().map(|k| k.day).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Sums cells into `group1 x day x group2` aggregates, ordered by (key, day).
    /// When grouping by sector, sectors in `excluded_sectors` are dropped.
    pub fn rollup(
        &self,
        g1: Group1Dim,
        g2: Group2Dim,
        catalog: &TickerCatalog,
        excluded_sectors: &[Sector],
    ) -> Vec<DailyAggregate> {
        let mut acc: BTreeMap<(GroupKey, NaiveDate), Counts> = BTreeMap::new();
        // Resolve each ticker once.
        let mut g1_cache: HashMap<Ticker, Option<Group1>> = HashMap::new();
        for (k, c) in &self.cells {
            let group1 = g1_cache
                .entry(k.ticker)
                .or_insert_with(|| {
                    let g = g1.key(&k.ticker, catalog);
                    match &g {
                        Group1::Sector(s) if excluded_sectors.contains(s) => None,
                        _ => Some(g),
                    }
                })
                .clone();
            let Some(group1) = group1 else { continue };
            let key = GroupKey {
                group1,
                group2: g2.key(&k.profile),
            };
            *acc.entry((key, k.day)).or_default() += *c;
        }
        acc.into_iter()
            .map(|((key, day), c)| DailyAggregate::from_counts(key, day, c))
            .collect()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CUBE_HEADER).unwrap();
        for (k, c) in self.sorted() {
            w.write_record([
                k.day.format("%Y-%m-%d").to_string().as_str(),
                k.ticker.as_str(),
                k.profile.approach.label(),
                k.profile.holding_period.label(),
                k.profile.experience.label(),
                &c.bullish.to_string(),
                &c.bearish.to_string(),
            ])
            .unwrap();
        }
        w.into_inner().unwrap()
    }

    pub fn from_csv<R: Read>(rdr: R) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(rdr);
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().ne(CUBE_HEADER) {
            return Err(format!("unexpected count cube header {:?}", header));
        }
        let mut cube = CountCube::default();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let bad = |what: &str| format!("count cube row {}: bad {what}", i + 2);
            let key = CellKey {
                day: NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| bad("day"))?,
                ticker: Ticker::parse(&rec[1]).map_err(|_| bad("ticker"))?,
                profile: InvestorProfile::new(
                    Approach::lookup(&rec[2]).ok_or_else(|| bad("approach"))?,
                    HoldingPeriod::lookup(&rec[3]).ok_or_else(|| bad("holding_period"))?,
                    Experience::lookup(&rec[4]).ok_or_else(|| bad("experience"))?,
                ),
            };
            let counts = Counts {
                bullish: rec[5].parse().map_err(|_| bad("n_bullish"))?,
                bearish: rec[6].parse().map_err(|_| bad("n_bearish"))?,
            };
            cube.add(key, counts);
        }
        Ok(cube)
    }
}

/// Inputs shared by every aggregation over one corpus.
#[derive(Debug, Clone)]
pub struct AggregationContext<'a> {
    pub catalog: &'a TickerCatalog,
    pub calendar: &'a TradingCalendar,
    /// Inclusive trading-day range kept in the output.
    pub from: NaiveDate,
    pub to: NaiveDate,
    /// Sectors dropped when grouping by sector.
    pub excluded_sectors: Vec<Sector>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeStats {
    pub counted: u64,
    pub filtered_out: u64,
    pub out_of_calendar: u64,
    pub out_of_range: u64,
}

impl CubeStats {
    pub fn merge(&mut self, o: &CubeStats) {
        self.counted += o.counted;
        self.filtered_out += o.filtered_out;
        self.out_of_calendar += o.out_of_calendar;
        self.out_of_range += o.out_of_range;
    }
}

impl AggregationContext<'_> {
    /// Cube cell for a message, or why it does not count.
    pub fn classify(&self, m: &RawMessage, stats: &mut CubeStats) -> Option<CellKey> {
        if !filter_for_sentiment(m) {
            stats.filtered_out += 1;
            return None;
        }
        let Ok(day) = self.calendar.assign(m.created_at) else {
            stats.out_of_calendar += 1;
            return None;
        };
        if day < self.from || day > self.to {
            stats.out_of_range += 1;
            return None;
        }
        stats.counted += 1;
        Some(CellKey {
            day,
            ticker: m.cashtags[0],
            profile: m.profile,
        })
    }

    pub fn build_cube<'m>(&self, messages: impl IntoIterator<Item = &'m RawMessage>) -> (CountCube, CubeStats) {
        let mut cube = CountCube::default();
        let mut stats = CubeStats::default();
        for m in messages {
            if let Some(key) = self.classify(m, &mut stats) {
                cube.observe(key, m.sentiment);
            }
        }
        (cube, stats)
    }
}

/// Daily aggregates of `messages` at `g1 x day x g2`. Messages failing the
/// sentiment filter or outside the calendar/date range are skipped.
pub fn aggregate(messages: &[RawMessage], g1: Group1Dim, g2: Group2Dim, ctx: &AggregationContext<'_>) -> Vec<DailyAggregate> {
    let (cube, _) = ctx.build_cube(messages);
    cube.rollup(g1, g2, ctx.catalog, &ctx.excluded_sectors)
}
