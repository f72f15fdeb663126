//! Seeded synthetic corpora with a known bullish-probability model.
//!
//! Every classified message in a (sector, investor profile, trading day)
//! cell is bullish with probability [`SynthSpec::bullish_prob`],
//! independently. Bodies are a cashtag followed by a Poisson number of
//! filler words, so text statistics also have a closed-form expectation.

mod generate;
mod scenario;

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::catalog::{Approach, Category, Experience, HoldingPeriod, InvestorProfile, Sector, TickerCatalog, TickerInfo};
use crate::ingest::{Ticker, TradingCalendar};

pub use generate::{generate, generate_messages, generate_to_path, CellTruth, SynthManifest, CHUNK_MESSAGES, RNG_DESCRIPTION};
pub use scenario::{sector_prob_scenario, vshape_scenario};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("synth spec: {0}")]
    Toml(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTicker {
    pub symbol: Ticker,
    pub sector: Sector,
    pub industry: String,
    /// Relative share of primary cashtags.
    pub weight: f64,
}

/// Bullish probability for the cells a rule matches. Absent fields match
/// anything. With `p_end`, the probability moves linearly from `p` on the
/// regime's first trading day to `p_end` on its last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<Sector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approach: Option<Approach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holding_period: Option<HoldingPeriod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experience: Option<Experience>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_end: Option<f64>,
}

impl ProbRule {
    fn matches(&self, sector: Sector, profile: &InvestorProfile) -> bool {
        self.sector.is_none_or(|s| s == sector)
            && self.approach.is_none_or(|a| a == profile.approach)
            && self.holding_period.is_none_or(|h| h == profile.holding_period)
            && self.experience.is_none_or(|e| e == profile.experience)
    }
}

/// Inclusive trading-day interval with its own probability rules; the first
/// matching rule wins, then the regime default, then the spec default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_p: Option<f64>,
    #[serde(default)]
    pub rules: Vec<ProbRule>,
}

/// Category label -> relative weight, one map per profile dimension.
/// Missing categories get weight 0; an empty map means all NotClassified.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileMix {
    pub approach: BTreeMap<String, f64>,
    pub holding_period: BTreeMap<String, f64>,
    pub experience: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    /// Messages are posted on local calendar days `start ..= end`.
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub messages: u64,
    pub users: u64,
    #[serde(default)]
    pub profiles: ProfileMix,
    pub tickers: Vec<SynthTicker>,
    pub default_p: f64,
    #[serde(default)]
    pub regimes: Vec<Regime>,
    /// Relative message volume per local calendar day; unlisted days weigh 1.
    #[serde(default)]
    pub day_weights: BTreeMap<NaiveDate, f64>,
    pub unclassified_fraction: f64,
    pub multi_cashtag_fraction: f64,
    /// Share of messages posted Monday-Friday 9:00-16:00 local time.
    pub trading_hours_mass: f64,
    pub filler_words_mean: f64,
    /// Share of users whose follower/following counters are negative.
    #[serde(default)]
    pub negative_count_fraction: f64,
    /// Exponent of the Zipf-like user activity distribution; 0 is uniform.
    #[serde(default = "default_user_skew")]
    pub user_activity_skew: f64,
}

fn default_user_skew() -> f64 {
    0.8
}

fn check_prob(what: &str, p: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SynthError::InvalidSpec(format!("{what} = {p} is not in [0, 1]")))
    }
}

fn weights<C: Category>(dim: &str, mix: &BTreeMap<String, f64>) -> Result<Vec<(C, f64)>, SynthError> {
    let mut out = Vec::new();
    for (label, w) in mix {
        let c = C::lookup(label)
            .ok_or_else(|| SynthError::InvalidSpec(format!("unknown {dim} category {label:?}")))?;
        if !(w.is_finite() && *w >= 0.0) {
            return Err(SynthError::InvalidSpec(format!("{dim} weight for {label:?} must be >= 0")));
        }
        out.push((c, *w));
    }
    if out.iter().all(|(_, w)| *w == 0.0) {
        out = vec![(C::FALLBACK, 1.0)];
    }
    Ok(out)
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.end < self.start {
            return bad(format!("end {} before start {}", self.end, self.start));
        }
        if self.users == 0 && self.messages > 0 {
            return bad("messages need at least one user".into());
        }
        if self.tickers.is_empty() {
            return bad("at least one ticker is required".into());
        }
        if self.tickers.iter().any(|t| !(t.weight.is_finite() && t.weight >= 0.0)) || self.tickers.iter().all(|t| t.weight == 0.0) {
            return bad("ticker weights must be >= 0 with a positive total".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(t) = self.tickers.iter().find(|t| !seen.insert(t.symbol)) {
            return bad(format!("duplicate ticker {}", t.symbol));
        }
        if self.tickers.iter().any(|t| t.sector == Sector::Unknown) {
            return bad("ticker sectors must be named".into());
        }
        check_prob("default_p", self.default_p)?;
        check_prob("unclassified_fraction", self.unclassified_fraction)?;
        check_prob("multi_cashtag_fraction", self.multi_cashtag_fraction)?;
        check_prob("trading_hours_mass", self.trading_hours_mass)?;
        check_prob("negative_count_fraction", self.negative_count_fraction)?;
        if self.multi_cashtag_fraction > 0.0 && self.tickers.len() < 2 {
            return bad("multi-cashtag messages need at least two tickers".into());
        }
        if !(self.filler_words_mean.is_finite() && self.filler_words_mean >= 0.0) {
            return bad("filler_words_mean must be >= 0".into());
        }
        if !(self.user_activity_skew.is_finite() && self.user_activity_skew >= 0.0) {
            return bad("user_activity_skew must be >= 0".into());
        }
        if self.day_weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("day weights must be >= 0".into());
        }
        for r in &self.regimes {
            if r.end < r.start {
                return bad(format!("regime {} ends before it starts", r.name));
            }
            if let Some(p) = r.default_p {
                check_prob(&format!("regime {} default_p", r.name), p)?;
            }
            for rule in &r.rules {
                check_prob(&format!("regime {} rule p", r.name), rule.p)?;
                if let Some(p) = rule.p_end {
                    check_prob(&format!("regime {} rule p_end", r.name), p)?;
                }
            }
        }
        if let Some(w) = self.regimes.windows(2).find(|w| w[0].end >= w[1].start) {
            return bad(format!("regimes {} and {} overlap or are out of order", w[0].name, w[1].name));
        }
        weights::<Approach>("approach", &self.profiles.approach)?;
        weights::<HoldingPeriod>("holding_period", &self.profiles.holding_period)?;
        weights::<Experience>("experience", &self.profiles.experience)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| SynthError::Toml(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes to TOML")
    }

    /// Calendar covering every trading day a message can land on.
    pub fn calendar(&self) -> TradingCalendar {
        TradingCalendar::us_equities(self.start, self.end)
    }

    pub fn catalog(&self) -> TickerCatalog {
        TickerCatalog::from_entries(self.tickers.iter().map(|t| TickerInfo {
            symbol: t.symbol,
            sector: t.sector,
            industry: t.industry.clone(),
        }))
        .expect("validated tickers are unique")
    }

    /// Index of the regime containing `day`.
    pub fn regime_of(&self, day: NaiveDate) -> Option<usize> {
        self.regimes.iter().position(|r| r.start <= day && day <= r.end)
    }

    /// Ground-truth bullish probability of a classified message.
    pub fn bullish_prob(&self, sector: Sector, profile: &InvestorProfile, day: NaiveDate, cal: &TradingCalendar) -> f64 {
        let Some(ri) = self.regime_of(day) else {
            return self.default_p;
        };
        let r = &self.regimes[ri];
        let Some(rule) = r.rules.iter().find(|rule| rule.matches(sector, profile)) else {
            return r.default_p.unwrap_or(self.default_p);
        };
        match rule.p_end {
            None => rule.p,
            Some(p_end) => {
                let sessions = cal.sessions_between(r.start, r.end);
                let n = sessions.len();
                if n < 2 {
                    return rule.p;
                }
                let i = sessions.partition_point(|d| *d < day).min(n - 1);
                rule.p + (p_end - rule.p) * i as f64 / (n - 1) as f64
            }
        }
    }
}
