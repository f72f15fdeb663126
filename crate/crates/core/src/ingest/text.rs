//! Message text features: word, character, stopword and cashtag counts.
//!
//! Words are maximal whitespace-delimited tokens. Stopword matching is
//! case-insensitive on the token with leading/trailing non-alphanumeric
//! characters removed. Bodies are HTML-entity decoded by the caller.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cashtag::token_is_cashtag;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("message body has no words")]
    EmptyBody,
    #[error("reading stopword list {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A lowercase stopword set.
#[derive(Debug, Clone)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// Parses one word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Stopwords { words }
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        let text = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    /// The shipped English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::english()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextFeatures {
    pub n_words: u32,
    /// Non-whitespace characters.
    pub n_chars: u32,
    pub avg_word_len: f64,
    pub n_stopwords: u32,
    pub n_cashtags: u32,
}

/// Decodes HTML character references (`&#39;`, `&amp;`, ...).
pub fn decode_entities(body: &str) -> std::borrow::Cow<'_, str> {
    if body.contains('&') {
        html_escape::decode_html_entities(body)
    } else {
        std::borrow::Cow::Borrowed(body)
    }
}

pub fn text_features(body: &str, stopwords: &Stopwords) -> Result<TextFeatures, TextError> {
    let mut n_words = 0u32;
    let mut n_chars = 0u32;
    let mut n_stopwords = 0u32;
    let mut n_cashtags = 0u32;
    let mut lowered = String::new();
    for token in body.split_whitespace() {
        n_words += 1;
        n_chars += token.chars().count() as u32;
        if token_is_cashtag(token) {
            n_cashtags += 1;
        }
        let bare = token.trim_matches(|c: char| !c.is_alphanumeric());
        if bare.is_empty() {
            continue;
        }
        lowered.clear();
        lowered.extend(bare.chars().flat_map(char::to_lowercase));
        if stopwords.contains(&lowered) {
            n_stopwords += 1;
        }
    }
    if n_words == 0 {
        return Err(TextError::EmptyBody);
    }
    Ok(TextFeatures {
        n_words,
        n_chars,
        avg_word_len: f64::from(n_chars) / f64::from(n_words),
        n_stopwords,
        n_cashtags,
    })
}
