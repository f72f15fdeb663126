//! Ticker symbols and `$TICKER` extraction.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayString;
use serde::{Deserialize, Serialize};

/// Longest accepted ticker symbol, in bytes.
pub const MAX_TICKER_LEN: usize = 10;

/// An uppercase ticker symbol matching `[A-Z][A-Z0-9.\-]{0,9}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ticker(ArrayString<MAX_TICKER_LEN>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid ticker symbol {0:?}")]
pub struct InvalidTicker(pub String);

impl Ticker {
    /// Case-folds `raw` to uppercase and validates it against the ticker pattern.
    pub fn parse(raw: &str) -> Result<Ticker, InvalidTicker> {
        let bad = || InvalidTicker(raw.to_string());
        let mut out = ArrayString::<MAX_TICKER_LEN>::new();
        for (i, c) in raw.chars().enumerate() {
            let ok = if i == 0 {
                c.is_ascii_alphabetic()
            } else {
                c.is_ascii_alphanumeric() || c == '.' || c == '-'
            };
            if !ok {
                return Err(bad());
            }
            out.try_push(c.to_ascii_uppercase()).map_err(|_| bad())?;
        }
        if out.is_empty() {
            return Err(bad());
        }
        Ok(Ticker(out))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl fmt::Display for Ticker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Ticker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.as_str())
    }
}

impl FromStr for Ticker {
    type Err = InvalidTicker;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ticker::parse(s)
    }
}

impl TryFrom<String> for Ticker {
    type Error = InvalidTicker;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Ticker::parse(&value)
    }
}

impl From<Ticker> for String {
    fn from(t: Ticker) -> String {
        t.as_str().to_string()
    }
}

fn is_symbol_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'.' || b == b'-'
}

/// Scans `text` for a cashtag starting at byte `dollar` (which must be `$`).
/// Returns the ticker and the byte offset just past it.
fn cashtag_at(bytes: &[u8], dollar: usize) -> Option<(Ticker, usize)> {
    if dollar > 0 && bytes[dollar - 1].is_ascii_alphanumeric() {
        return None;
    }
    let start = dollar + 1;
    let mut end = start;
    while end < bytes.len() && is_symbol_char(bytes[end]) {
        end += 1;
    }
    // Sentence punctuation directly after a ticker is not part of it.
    let mut sym_end = end;
    while sym_end > start && matches!(bytes[sym_end - 1], b'.' | b'-') {
        sym_end -= 1;
    }
    if sym_end == start || sym_end - start > MAX_TICKER_LEN {
        return None;
    }
    // Safe: the run is pure ASCII.
    let sym = std::str::from_utf8(&bytes[start..sym_end]).ok()?;
    Ticker::parse(sym).ok().map(|t| (t, end))
}

/// Every `$TICKER` in `body`, uppercased, in first-appearance order, without duplicates.
pub fn extract_cashtags(body: &str) -> Vec<Ticker> {
    let bytes = body.as_bytes();
    let mut out: Vec<Ticker> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'$' {
            if let Some((t, next)) = cashtag_at(bytes, i) {
                if !out.contains(&t) {
                    out.push(t);
                }
                i = next;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// True when a whitespace token, after trimming surrounding punctuation
/// other than `$`, is a cashtag.
pub(crate) fn token_is_cashtag(token: &str) -> bool {
    let trimmed = token.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '$');
    let bytes = trimmed.as_bytes();
    bytes.first() == Some(&b'$') && cashtag_at(bytes, 0).is_some()
}
