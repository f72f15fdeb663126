//! Parsing, validation and day assignment of raw message streams.

mod calendar;
mod cashtag;
mod message;
mod reader;
mod text;

pub use calendar::{assign_trading_day, default_close, CalendarError, TradingCalendar, DEFAULT_TZ};
pub use cashtag::{extract_cashtags, InvalidTicker, Ticker, MAX_TICKER_LEN};
pub use message::{filter_for_sentiment, parse_message, parse_timestamp, ParseError, RawMessage, SentimentLabel};
pub use reader::{
    ingest_files, ingest_reader, open_lines, parse_corpus, IngestOptions, IngestReport, ReadError, Reject,
    DEFAULT_SHARD_LINES,
};
pub use text::{decode_entities, text_features, Stopwords, TextError, TextFeatures};
