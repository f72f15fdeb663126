//! Grouping keys: investor profiles per user and the ticker -> sector/industry map.

mod profile;

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::{RawMessage, Ticker};

pub use profile::{Approach, Category, Experience, HoldingPeriod, InvestorProfile, Sector};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("ticker catalog lists {0} more than once")]
    DuplicateSymbol(Ticker),
    #[error("ticker catalog row {row}: unknown sector name {name:?}")]
    UnknownSectorName { row: usize, name: String },
    #[error("ticker catalog row {row}: invalid symbol {symbol:?}")]
    BadSymbol { row: usize, symbol: String },
    #[error("ticker catalog: {0}")]
    Csv(#[from] csv::Error),
    #[error("ticker catalog: expected header `symbol,sector,industry`, found {0:?}")]
    BadHeader(String),
}

pub const UNKNOWN_INDUSTRY: &str = "Unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickerInfo {
    pub symbol: Ticker,
    pub sector: Sector,
    pub industry: String,
}

/// Immutable ticker lookup. Unmapped tickers resolve to `Sector::Unknown`.
#[derive(Debug, Clone, Default)]
pub struct TickerCatalog {
    entries: BTreeMap<Ticker, TickerInfo>,
}

impl TickerCatalog {
    pub fn from_entries(entries: impl IntoIterator<Item = TickerInfo>) -> Result<Self, CatalogError> {
        let mut map = BTreeMap::new();
        for e in entries {
            let sym = e.symbol;
            if map.insert(sym, e).is_some() {
                return Err(CatalogError::DuplicateSymbol(sym));
            }
        }
        Ok(TickerCatalog { entries: map })
    }

    /// Reads CSV with header `symbol,sector,industry`.
    pub fn from_reader<R: Read>(rdr: R) -> Result<Self, CatalogError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_lowercase).collect();
        if header != ["symbol", "sector", "industry"] {
            return Err(CatalogError::BadHeader(header.join(",")));
        }
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let symbol = Ticker::parse(&rec[0]).map_err(|_| CatalogError::BadSymbol {
                row,
                symbol: rec[0].to_string(),
            })?;
            let sector = Sector::from_catalog_name(&rec[1]).ok_or_else(|| CatalogError::UnknownSectorName {
                row,
                name: rec[1].to_string(),
            })?;
            entries.push(TickerInfo {
                symbol,
                sector,
                industry: rec[2].to_string(),
            });
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let file = std::fs::File::open(path).map_err(csv::Error::from)?;
        Self::from_reader(file)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["symbol", "sector", "industry"]).unwrap();
        for e in self.entries.values() {
            w.write_record([e.symbol.as_str(), &format!("{:?}", e.sector), &e.industry])
                .unwrap();
        }
        w.into_inner().unwrap()
    }

    pub fn get(&self, symbol: &Ticker) -> Option<&TickerInfo> {
        self.entries.get(symbol)
    }

    pub fn sector(&self, symbol: &Ticker) -> Sector {
        self.get(symbol).map_or(Sector::Unknown, |e| e.sector)
    }

    pub fn industry(&self, symbol: &Ticker) -> &str {
        self.get(symbol).map_or(UNKNOWN_INDUSTRY, |e| e.industry.as_str())
    }

    /// Full record; unmapped symbols get sector `Unknown` and industry "Unknown".
    pub fn lookup(&self, symbol: &Ticker) -> TickerInfo {
        self.get(symbol).cloned().unwrap_or(TickerInfo {
            symbol: *symbol,
            sector: Sector::Unknown,
            industry: UNKNOWN_INDUSTRY.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TickerInfo> {
        self.entries.values()
    }
}

/// Per-user state folded over a corpus. The profile and account counters
/// come from the user's most recent message (latest `created_at`, ties
/// broken by the larger message id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub n_messages: u64,
    pub latest_ts: i64,
    pub latest_id: u64,
    pub profile: InvestorProfile,
    pub followers: i64,
    pub following: i64,
    pub ideas: u64,
    pub likes: u64,
}

impl UserRecord {
    pub fn from_message(m: &RawMessage) -> Self {
        UserRecord {
            n_messages: 1,
            latest_ts: m.created_at.timestamp(),
            latest_id: m.message_id,
            profile: m.profile,
            followers: m.followers,
            following: m.following,
            ideas: m.ideas,
            likes: m.likes,
        }
    }

    /// Order-independent merge.
    pub fn merge(&mut self, other: &UserRecord) {
        let n = self.n_messages + other.n_messages;
        if (other.latest_ts, other.latest_id) > (self.latest_ts, self.latest_id) {
            *self = *other;
        }
        self.n_messages = n;
    }
}

/// User id -> [`UserRecord`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserIndex {
    pub users: BTreeMap<u64, UserRecord>,
}

impl UserIndex {
    pub fn observe(&mut self, user_id: u64, rec: UserRecord) {
        self.users
            .entry(user_id)
            .and_modify(|r| r.merge(&rec))
            .or_insert(rec);
    }

    pub fn from_messages<'a>(msgs: impl IntoIterator<Item = &'a RawMessage>) -> Self {
        let mut idx = UserIndex::default();
        for m in msgs {
            idx.observe(m.user_id, UserRecord::from_message(m));
        }
        idx
    }

    pub fn merge(&mut self, other: &UserIndex) {
        for (id, rec) in &other.users {
            self.observe(*id, *rec);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub category: &'static str,
    pub n_users: u64,
    pub pct_users: f64,
    pub n_messages: u64,
    pub pct_messages: f64,
}

/// One panel of the user-profile frequency table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileTable {
    /// Dimension title, e.g. "Approach".
    pub dimension: &'static str,
    pub slug: &'static str,
    pub rows: Vec<ProfileRow>,
    pub total_users: u64,
    pub total_messages: u64,
}

fn pct(part: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

fn panel<C: Category>(
    dimension: &'static str,
    slug: &'static str,
    counts: &BTreeMap<InvestorProfile, (u64, u64)>,
    pick: impl Fn(&InvestorProfile) -> C,
) -> ProfileTable {
    let mut by_cat: HashMap<C, (u64, u64)> = HashMap::new();
    for (p, (u, m)) in counts {
        let e = by_cat.entry(pick(p)).or_default();
        e.0 += u;
        e.1 += m;
    }
    let total_users: u64 = counts.values().map(|c| c.0).sum();
    let total_messages: u64 = counts.values().map(|c| c.1).sum();
    let rows = C::ALL
        .iter()
        .map(|c| {
            let (u, m) = by_cat.get(c).copied().unwrap_or_default();
            ProfileRow {
                category: c.label(),
                n_users: u,
                pct_users: pct(u, total_users),
                n_messages: m,
                pct_messages: pct(m, total_messages),
            }
        })
        .collect();
    ProfileTable {
        dimension,
        slug,
        rows,
        total_users,
        total_messages,
    }
}

/// `(users, messages)` per full profile, each user counted under their latest profile.
pub fn profile_counts(users: &UserIndex) -> BTreeMap<InvestorProfile, (u64, u64)> {
    let mut counts: BTreeMap<InvestorProfile, (u64, u64)> = BTreeMap::new();
    for rec in users.users.values() {
        let e = counts.entry(rec.profile).or_default();
        e.0 += 1;
        e.1 += rec.n_messages;
    }
    counts
}

/// Users and messages per category for approach, holding period and experience.
pub fn profile_tables_from_counts(counts: &BTreeMap<InvestorProfile, (u64, u64)>) -> [ProfileTable; 3] {
    [
        panel("Approach", "approach", counts, |p| p.approach),
        panel("Holding Period", "holding_period", counts, |p| p.holding_period),
        panel("Experience", "experience", counts, |p| p.experience),
    ]
}

/// Profile tables from a user index built over the unfiltered corpus.
pub fn profile_tables(users: &UserIndex) -> [ProfileTable; 3] {
    profile_tables_from_counts(&profile_counts(users))
}

pub fn profile_frequency_table<'a>(messages: impl IntoIterator<Item = &'a RawMessage>) -> [ProfileTable; 3] {
    profile_tables(&UserIndex::from_messages(messages))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "symbol,sector,industry\nTSLA,ConsumerGoods,Auto Manufacturers - Major\nJPM,Financial,Money Center Banks\n";

    #[test]
    fn load_and_lookup() {
        let cat = TickerCatalog::from_reader(CSV.as_bytes()).unwrap();
        let tsla = Ticker::parse("TSLA").unwrap();
        assert_eq!(cat.sector(&tsla), Sector::ConsumerGoods);
        assert_eq!(cat.industry(&tsla), "Auto Manufacturers - Major");
        let none = Ticker::parse("ZZZ").unwrap();
        assert_eq!(cat.sector(&none), Sector::Unknown);
        assert_eq!(cat.lookup(&none).industry, UNKNOWN_INDUSTRY);
    }

    #[test]
    fn duplicate_symbol() {
        let csv = "symbol,sector,industry\nSPY,Financial,ETF\nSPY,Financial,ETF\n";
        assert!(matches!(
            TickerCatalog::from_reader(csv.as_bytes()),
            Err(CatalogError::DuplicateSymbol(_))
        ));
    }

    #[test]
    fn unknown_sector_name() {
        let csv = "symbol,sector,industry\nBTC,Crypto,Coins\n";
        assert!(matches!(
            TickerCatalog::from_reader(csv.as_bytes()),
            Err(CatalogError::UnknownSectorName { row: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let cat = TickerCatalog::from_reader(CSV.as_bytes()).unwrap();
        let back = TickerCatalog::from_reader(cat.to_csv().as_slice()).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), cat.iter().collect::<Vec<_>>());
    }

    #[test]
    fn latest_profile_wins_regardless_of_merge_order() {
        let mut a = UserRecord {
            n_messages: 2,
            latest_ts: 10,
            latest_id: 5,
            profile: InvestorProfile::default(),
            followers: 1,
            following: 1,
            ideas: 1,
            likes: 1,
        };
        let mut b = a;
        b.n_messages = 3;
        b.latest_ts = 20;
        b.profile.experience = Experience::Novice;
        let mut ab = a;
        ab.merge(&b);
        b.merge(&a);
        assert_eq!(ab, b);
        assert_eq!(ab.n_messages, 5);
        assert_eq!(ab.profile.experience, Experience::Novice);
        a.merge(&a.clone());
        assert_eq!(a.n_messages, 4);
    }
}
