use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{Category, TickerCatalog};
use crate::ingest::{RawMessage, Ticker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopKey {
    Cashtag,
    Industry,
    Sector,
}

impl TopKey {
    pub const ALL: [TopKey; 3] = [TopKey::Cashtag, TopKey::Industry, TopKey::Sector];

    pub fn slug(self) -> &'static str {
        match self {
            TopKey::Cashtag => "cashtag",
            TopKey::Industry => "industry",
            TopKey::Sector => "sector",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            TopKey::Cashtag => "Cashtag",
            TopKey::Industry => "Industry",
            TopKey::Sector => "Sector",
        }
    }
}

impl fmt::Display for TopKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for TopKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopKey::ALL
            .into_iter()
            .find(|k| k.slug() == s)
            .ok_or_else(|| format!("unknown top-k key {s:?} (cashtag|industry|sector)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub name: String,
    pub frequency: u64,
    /// Percent of all cashtag occurrences.
    pub pct: f64,
}

/// Counts one occurrence per cashtag per message over an unfiltered corpus.
pub fn cashtag_counts<'a>(messages: impl IntoIterator<Item = &'a RawMessage>) -> BTreeMap<Ticker, u64> {
    let mut counts = BTreeMap::new();
    for m in messages {
        for t in &m.cashtags {
            *counts.entry(*t).or_insert(0) += 1;
        }
    }
    counts
}

/// Ranks by descending frequency, ties broken by name. `k = None` keeps every entry.
pub fn top_k_from_counts(
    counts: &BTreeMap<Ticker, u64>,
    key: TopKey,
    catalog: &TickerCatalog,
    k: Option<usize>,
) -> Vec<RankedEntry> {
    let total: u64 = counts.values().sum();
    let mut by_name: BTreeMap<String, u64> = BTreeMap::new();
    for (t, n) in counts {
        let name = match key {
            TopKey::Cashtag => t.as_str().to_string(),
            TopKey::Industry => catalog.industry(t).to_string(),
            TopKey::Sector => catalog.sector(t).label().to_string(),
        };
        *by_name.entry(name).or_insert(0) += n;
    }
    let mut ranked: Vec<(String, u64)> = by_name.into_iter().collect();
    // Stable sort keeps the lexicographic BTreeMap order among ties.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked
        .into_iter()
        .take(k.unwrap_or(usize::MAX))
        .map(|(name, frequency)| RankedEntry {
            name,
            frequency,
            pct: if total == 0 { 0.0 } else { 100.0 * frequency as f64 / total as f64 },
        })
        .collect()
}

pub fn top_k(messages: &[RawMessage], key: TopKey, catalog: &TickerCatalog, k: Option<usize>) -> Vec<RankedEntry> {
    top_k_from_counts(&cashtag_counts(messages), key, catalog, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_corpus;

    fn corpus(bodies: &[&str]) -> Vec<RawMessage> {
        let text: String = bodies
            .iter()
            .enumerate()
            .map(|(i, b)| {
                format!(
                    "{{\"object\":\"Message\",\"data\":{{\"id\":{},\"body\":{},\"user\":{{\"id\":1}}}},\"time\":\"2020-01-02T15:00:00Z\"}}\n",
                    i + 1,
                    serde_json::to_string(b).unwrap()
                )
            })
            .collect();
        let (msgs, report) = parse_corpus(&text);
        assert!(report.rejects.is_empty());
        msgs
    }

    #[test]
    fn tie_break_is_lexicographic() {
        let msgs = corpus(&["$B and $A"]);
        let top = top_k(&msgs, TopKey::Cashtag, &TickerCatalog::default(), None);
        assert_eq!(top.len(), 2);
        assert_eq!((top[0].name.as_str(), top[0].frequency), ("A", 1));
        assert_eq!((top[1].name.as_str(), top[1].frequency), ("B", 1));
        assert_eq!(top[0].pct, 50.0);
    }

    #[test]
    fn descending_and_complete() {
        let msgs = corpus(&["$SPY", "$SPY $TSLA", "$AAPL", "$SPY"]);
        let top = top_k(&msgs, TopKey::Cashtag, &TickerCatalog::default(), None);
        let names: Vec<&str> = top.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["SPY", "AAPL", "TSLA"]);
        assert_eq!(top.iter().map(|e| e.frequency).sum::<u64>(), 5);
        let top1 = top_k(&msgs, TopKey::Cashtag, &TickerCatalog::default(), Some(1));
        assert_eq!(top1.len(), 1);
        let sectors = top_k(&msgs, TopKey::Sector, &TickerCatalog::default(), None);
        assert_eq!(sectors[0].name, "Unknown");
        assert_eq!(sectors[0].frequency, 5);
    }
}
