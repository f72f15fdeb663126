//! Message records and their newline-delimited JSON wire form.
//!
//! One line per message:
//!
//! ```json
//! {"object":"Message","action":"create",
//!  "data":{"id":185405776,"body":"... $PLAB ...",
//!          "user":{"id":42,"followers":10,"following":3,"ideas":120,"like_count":7,
//!                  "trading_strategy":{"approach":"Technical","holding_period":"Swing Trader","experience":"Novice"}},
//!          "symbols":[{"symbol":"PLAB"}],
//!          "entities":{"sentiment":{"basic":"Bullish"}}},
//!  "time":"2019-12-01T00:00:00Z"}
//! ```
//!
//! `object`, `data.id`, `data.body`, `data.user.id` and `time` are required.
//! Profile fields, account counters, `symbols` and `entities` are optional.
//! When `symbols` is absent the cashtags are extracted from the decoded body.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::cashtag::{extract_cashtags, Ticker};
use super::text::decode_entities;
use crate::catalog::{Approach, Category, Experience, HoldingPeriod, InvestorProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum SentimentLabel {
    Bullish,
    Bearish,
    #[default]
    Unclassified,
}

impl SentimentLabel {
    /// +1 for bullish, -1 for bearish, none otherwise.
    pub fn value(self) -> Option<i8> {
        match self {
            SentimentLabel::Bullish => Some(1),
            SentimentLabel::Bearish => Some(-1),
            SentimentLabel::Unclassified => None,
        }
    }

    pub fn is_classified(self) -> bool {
        self != SentimentLabel::Unclassified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMessage {
    pub message_id: u64,
    pub user_id: u64,
    /// Body as received (HTML entities not decoded).
    pub body: String,
    pub created_at: DateTime<Utc>,
    pub sentiment: SentimentLabel,
    pub cashtags: Vec<Ticker>,
    pub profile: InvestorProfile,
    /// May be negative in source data; kept as-is.
    pub followers: i64,
    /// May be negative in source data; kept as-is.
    pub following: i64,
    pub ideas: u64,
    pub likes: u64,
}

impl RawMessage {
    /// Negative follower/following counters.
    pub fn has_negative_counts(&self) -> bool {
        self.followers < 0 || self.following < 0
    }

    pub fn to_json_line(&self) -> String {
        let wire = WireRecord {
            object: "Message".into(),
            action: Some("create".into()),
            data: WireData {
                id: self.message_id,
                body: self.body.clone(),
                user: WireUser {
                    id: self.user_id,
                    followers: Some(self.followers),
                    following: Some(self.following),
                    ideas: Some(self.ideas as i64),
                    like_count: Some(self.likes as i64),
                    trading_strategy: Some(WireStrategy {
                        approach: label_or_none(self.profile.approach),
                        holding_period: label_or_none(self.profile.holding_period),
                        experience: label_or_none(self.profile.experience),
                    }),
                },
                symbols: Some(
                    self.cashtags
                        .iter()
                        .map(|t| WireSymbol { symbol: t.to_string() })
                        .collect(),
                ),
                entities: Some(WireEntities {
                    sentiment: match self.sentiment {
                        SentimentLabel::Bullish => Some(WireSentiment { basic: Some("Bullish".into()) }),
                        SentimentLabel::Bearish => Some(WireSentiment { basic: Some("Bearish".into()) }),
                        SentimentLabel::Unclassified => None,
                    },
                }),
            },
            time: Some(self.created_at.to_rfc3339_opts(SecondsFormat::Secs, true)),
        };
        serde_json::to_string(&wire).expect("wire record serializes")
    }
}

fn label_or_none<C: Category>(c: C) -> Option<String> {
    (c != C::FALLBACK).then(|| c.label().to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct WireRecord {
    object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    action: Option<String>,
    data: WireData,
    // Optional at the serde level so a missing value reports as a timestamp error.
    #[serde(default)]
    time: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireData {
    id: u64,
    body: String,
    user: WireUser,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symbols: Option<Vec<WireSymbol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entities: Option<WireEntities>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireUser {
    id: u64,
    #[serde(default)]
    followers: Option<i64>,
    #[serde(default)]
    following: Option<i64>,
    #[serde(default)]
    ideas: Option<i64>,
    #[serde(default)]
    like_count: Option<i64>,
    #[serde(default)]
    trading_strategy: Option<WireStrategy>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireStrategy {
    #[serde(default)]
    approach: Option<String>,
    #[serde(default)]
    holding_period: Option<String>,
    #[serde(default)]
    experience: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireSymbol {
    symbol: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireEntities {
    #[serde(default)]
    sentiment: Option<WireSentiment>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireSentiment {
    #[serde(default)]
    basic: Option<String>,
}

/// Why a line was rejected. Carries the 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed JSON: {detail}")]
    MalformedJson { line: u64, detail: String },
    #[error("line {line}: schema violation: {detail}")]
    SchemaViolation { line: u64, detail: String },
    #[error("line {line}: bad timestamp: {detail}")]
    BadTimestamp { line: u64, detail: String },
    #[error("line {line}: duplicate message id {id}")]
    DuplicateId { line: u64, id: u64 },
}

impl ParseError {
    pub fn line(&self) -> u64 {
        match self {
            ParseError::MalformedJson { line, .. }
            | ParseError::SchemaViolation { line, .. }
            | ParseError::BadTimestamp { line, .. }
            | ParseError::DuplicateId { line, .. } => *line,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::MalformedJson { .. } => "MalformedJson",
            ParseError::SchemaViolation { .. } => "SchemaViolation",
            ParseError::BadTimestamp { .. } => "BadTimestamp",
            ParseError::DuplicateId { .. } => "DuplicateId",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            ParseError::MalformedJson { detail, .. }
            | ParseError::SchemaViolation { detail, .. }
            | ParseError::BadTimestamp { detail, .. } => detail.clone(),
            ParseError::DuplicateId { id, .. } => format!("message id {id} already ingested"),
        }
    }
}

/// Parses an ISO-8601 UTC timestamp with a trailing `Z`, truncated to seconds.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    if !raw.ends_with('Z') {
        return Err(format!("{raw:?} is not a UTC `...Z` timestamp"));
    }
    let ts = DateTime::parse_from_rfc3339(raw).map_err(|e| format!("{raw:?}: {e}"))?;
    let ts = ts.with_timezone(&Utc);
    Ok(DateTime::from_timestamp(ts.timestamp(), 0).expect("in range"))
}

/// Parses one NDJSON line. `line` is the 1-based line number used in errors.
pub fn parse_message(text: &str, line: u64) -> Result<RawMessage, ParseError> {
    let schema = |detail: String| ParseError::SchemaViolation { line, detail };
    let wire: WireRecord = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => schema(e.to_string()),
        _ => ParseError::MalformedJson {
            line,
            detail: e.to_string(),
        },
    })?;
    if wire.object != "Message" {
        return Err(schema(format!("object is {:?}, expected \"Message\"", wire.object)));
    }
    let raw_time = wire.time.ok_or_else(|| ParseError::BadTimestamp {
        line,
        detail: "missing `time`".into(),
    })?;
    let created_at = parse_timestamp(&raw_time).map_err(|detail| ParseError::BadTimestamp { line, detail })?;

    let data = wire.data;
    let sentiment = match data
        .entities
        .and_then(|e| e.sentiment)
        .and_then(|s| s.basic)
        .as_deref()
    {
        None => SentimentLabel::Unclassified,
        Some(s) if s.eq_ignore_ascii_case("bullish") => SentimentLabel::Bullish,
        Some(s) if s.eq_ignore_ascii_case("bearish") => SentimentLabel::Bearish,
        Some(other) => return Err(schema(format!("unknown sentiment {other:?}"))),
    };

    let cashtags = match data.symbols {
        Some(symbols) => {
            let mut out: Vec<Ticker> = Vec::with_capacity(symbols.len());
            for s in symbols {
                let t = Ticker::parse(s.symbol.trim_start_matches('$'))
                    .map_err(|e| schema(e.to_string()))?;
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            out
        }
        None => extract_cashtags(&decode_entities(&data.body)),
    };

    let user = data.user;
    let non_negative = |v: Option<i64>, name: &str| -> Result<u64, ParseError> {
        let v = v.unwrap_or(0);
        u64::try_from(v).map_err(|_| schema(format!("user.{name} is negative ({v})")))
    };
    let ideas = non_negative(user.ideas, "ideas")?;
    let likes = non_negative(user.like_count, "like_count")?;
    let profile = user
        .trading_strategy
        .map(|s| {
            InvestorProfile::new(
                s.approach.as_deref().map_or(Approach::NotClassified, Approach::from_label),
                s.holding_period
                    .as_deref()
                    .map_or(HoldingPeriod::NotClassified, HoldingPeriod::from_label),
                s.experience.as_deref().map_or(Experience::NotClassified, Experience::from_label),
            )
        })
        .unwrap_or_default();

    Ok(RawMessage {
        message_id: data.id,
        user_id: user.id,
        body: data.body,
        created_at,
        sentiment,
        cashtags,
        profile,
        followers: user.followers.unwrap_or(0),
        following: user.following.unwrap_or(0),
        ideas,
        likes,
    })
}

/// True iff the message is labeled and mentions exactly one ticker.
pub fn filter_for_sentiment(msg: &RawMessage) -> bool {
    msg.sentiment.is_classified() && msg.cashtags.len() == 1
}
