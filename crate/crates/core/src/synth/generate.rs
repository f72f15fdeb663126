use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{weights, SynthError, SynthSpec};
use crate::catalog::{Approach, Experience, HoldingPeriod, InvestorProfile, Sector};
use crate::ingest::{RawMessage, SentimentLabel, Ticker, TradingCalendar, DEFAULT_TZ};

/// Messages drawn from one RNG stream.
pub const CHUNK_MESSAGES: u64 = 50_000;

pub const RNG_DESCRIPTION: &str = "ChaCha8Rng (rand_chacha 0.9) from seed_from_u64(seed); \
stream 0 draws the user population, stream c+1 draws messages [c*50000, (c+1)*50000)";

const FIRST_MESSAGE_ID: u64 = 100_000_000;
const FIRST_USER_ID: u64 = 1_000;

/// Filler vocabulary. Includes stopwords, punctuation at token edges and an
/// HTML entity so every text feature is exercised.
const VOCAB: &[&str] = &[
    "the", "is", "a", "to", "and", "of", "in", "on", "for", "this", "it&#39;s", "my", "we", "be", "at", "buy", "sell",
    "calls", "puts", "long", "short", "breakout", "support", "resistance", "earnings", "moon", "dip", "bounce",
    "chart", "volume", "target", "price", "today!", "tomorrow.", "green", "red", "rally", "crash", "hold", "squeeze",
    "gap", "fill", "trend", "weekly", "options", "shares", "news", "guidance", "beat", "miss", "(again)", "loading",
    "higher", "lower", "strong", "weak", "virus", "market", "fed", "cut",
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: i64,
    len: i64,
}

#[derive(Debug, Clone, Copy)]
struct SynthUser {
    id: u64,
    profile: InvestorProfile,
    followers: i64,
    following: i64,
    ideas: u64,
    likes: u64,
}

/// Ground truth for one (sector, regime) cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellTruth {
    pub sector: Sector,
    pub regime: String,
    pub n_classified: u64,
    pub n_bullish: u64,
    /// Mean bullish probability over the cell's classified messages.
    pub mean_p: f64,
}

#[derive(Debug, Default)]
struct ChunkStats {
    messages: u64,
    classified: u64,
    bullish: u64,
    multi: u64,
    trading_hours: u64,
    words: u64,
    words_sq: u64,
    cells: BTreeMap<(Sector, String), (u64, u64, f64)>,
}

impl ChunkStats {
    fn merge(&mut self, o: ChunkStats) {
        self.messages += o.messages;
        self.classified += o.classified;
        self.bullish += o.bullish;
        self.multi += o.multi;
        self.trading_hours += o.trading_hours;
        self.words += o.words;
        self.words_sq += o.words_sq;
        for (k, (n, b, p)) in o.cells {
            let e = self.cells.entry(k).or_default();
            e.0 += n;
            e.1 += b;
            e.2 += p;
        }
    }
}

/// What was drawn, for replay and as an oracle for downstream statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub generator: String,
    pub rng: String,
    pub spec: SynthSpec,
    pub messages: u64,
    pub users: u64,
    pub classified: u64,
    pub bullish: u64,
    pub multi_cashtag: u64,
    /// Messages posted Monday-Friday 9:00-16:00 local time.
    pub trading_hours_messages: u64,
    pub expected_mean_words: f64,
    pub realized_mean_words: f64,
    pub realized_words_std: f64,
    pub cells: Vec<CellTruth>,
}

struct Plan<'a> {
    spec: &'a SynthSpec,
    cal: TradingCalendar,
    users: Vec<SynthUser>,
    user_pick: Option<WeightedIndex<f64>>,
    tickers: Vec<(Ticker, Sector)>,
    ticker_pick: WeightedIndex<f64>,
    trading: Vec<Segment>,
    trading_pick: Option<WeightedIndex<f64>>,
    other: Vec<Segment>,
    other_pick: Option<WeightedIndex<f64>>,
    filler: Option<Poisson<f64>>,
}

fn local_ts(tz: Tz, day: NaiveDate, hour: u32) -> i64 {
    let (day, hour) = if hour == 24 { (day.succ_opt().unwrap(), 0) } else { (day, hour) };
    let local = day.and_time(NaiveTime::from_hms_opt(hour, 0, 0).unwrap());
    let t = tz.from_local_datetime(&local);
    t.earliest().or(t.latest()).expect("whole hours outside 1-3am exist").timestamp()
}

fn pick(segs: &[Segment], weights: &[f64]) -> Option<WeightedIndex<f64>> {
    (!segs.is_empty() && weights.iter().any(|w| *w > 0.0)).then(|| WeightedIndex::new(weights).unwrap())
}

fn draw<C: Copy>(rng: &mut ChaCha8Rng, options: &[(C, f64)]) -> C {
    let idx = WeightedIndex::new(options.iter().map(|o| o.1)).unwrap();
    options[idx.sample(rng)].0
}

impl<'a> Plan<'a> {
    fn new(spec: &'a SynthSpec) -> Self {
        let tz = DEFAULT_TZ;
        let (mut trading, mut tw, mut other, mut ow) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for day in spec.start.iter_days().take_while(|d| *d <= spec.end) {
            let w = spec.day_weights.get(&day).copied().unwrap_or(1.0);
            let weekday = !matches!(day.weekday(), Weekday::Sat | Weekday::Sun);
            let mut push = |from: u32, to: u32, is_trading: bool| {
                let s = Segment {
                    start: local_ts(tz, day, from),
                    len: local_ts(tz, day, to) - local_ts(tz, day, from),
                };
                if is_trading {
                    trading.push(s);
                    tw.push(w * s.len as f64);
                } else {
                    other.push(s);
                    ow.push(w * s.len as f64);
                }
            };
            if weekday {
                push(0, 9, false);
                push(9, 16, true);
                // Past the last close a message would fall outside the calendar.
                if day < spec.end {
                    push(16, 24, false);
                }
            } else {
                push(0, 24, false);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(0);
        let approach = weights::<Approach>("approach", &spec.profiles.approach).unwrap();
        let holding = weights::<HoldingPeriod>("holding_period", &spec.profiles.holding_period).unwrap();
        let experience = weights::<Experience>("experience", &spec.profiles.experience).unwrap();
        let followers = LogNormal::<f64>::new(1.0, 2.0).unwrap();
        let following = LogNormal::<f64>::new(1.5, 1.5).unwrap();
        let ideas = LogNormal::<f64>::new(3.5, 2.0).unwrap();
        let likes = LogNormal::<f64>::new(3.0, 2.0).unwrap();
        let users: Vec<SynthUser> = (0..spec.users)
            .map(|u| {
                let profile = InvestorProfile::new(draw(&mut rng, &approach), draw(&mut rng, &holding), draw(&mut rng, &experience));
                let negative = rng.random_bool(spec.negative_count_fraction);
                let f = followers.sample(&mut rng).min(1e6) as i64;
                let g = following.sample(&mut rng).min(1e4) as i64;
                SynthUser {
                    id: FIRST_USER_ID + u,
                    profile,
                    followers: if negative { -1 } else { f },
                    following: if negative { -3 } else { g },
                    ideas: ideas.sample(&mut rng).min(1e7) as u64,
                    likes: likes.sample(&mut rng).min(1e7) as u64,
                }
            })
            .collect();
        let user_pick = (!users.is_empty()).then(|| {
            WeightedIndex::new((0..users.len()).map(|u| 1.0 / ((u + 1) as f64).powf(spec.user_activity_skew))).unwrap()
        });

        Plan {
            spec,
            cal: spec.calendar(),
            users,
            user_pick,
            tickers: spec.tickers.iter().map(|t| (t.symbol, t.sector)).collect(),
            ticker_pick: WeightedIndex::new(spec.tickers.iter().map(|t| t.weight)).unwrap(),
            trading_pick: pick(&trading, &tw),
            trading,
            other_pick: pick(&other, &ow),
            other,
            filler: (spec.filler_words_mean > 0.0).then(|| Poisson::new(spec.filler_words_mean).unwrap()),
        }
    }

    fn expected_extra_cashtags(&self) -> f64 {
        // One or two extra tags, never more than the other tickers available.
        let n_other = self.tickers.len() - 1;
        (1.min(n_other) + 2.min(n_other)) as f64 / 2.0
    }

    fn chunk(&self, c: u64) -> (Vec<RawMessage>, ChunkStats) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(c + 1);
        let lo = c * CHUNK_MESSAGES;
        let hi = (lo + CHUNK_MESSAGES).min(self.spec.messages);
        let mut stats = ChunkStats::default();
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for i in lo..hi {
            out.push(self.message(&mut rng, i, &mut stats));
        }
        (out, stats)
    }

    fn message(&self, rng: &mut ChaCha8Rng, index: u64, stats: &mut ChunkStats) -> RawMessage {
        let spec = self.spec;
        let in_trading = match (&self.trading_pick, &self.other_pick) {
            (Some(_), Some(_)) => rng.random_bool(spec.trading_hours_mass),
            (Some(_), None) => true,
            _ => false,
        };
        let seg = if in_trading {
            self.trading[self.trading_pick.as_ref().unwrap().sample(rng)]
        } else {
            self.other[self.other_pick.as_ref().expect("spec spans at least one day").sample(rng)]
        };
        let ts = seg.start + rng.random_range(0..seg.len);
        let created_at = DateTime::<Utc>::from_timestamp(ts, 0).unwrap();
        let user = self.users[self.user_pick.as_ref().unwrap().sample(rng)];
        let primary = self.ticker_pick.sample(rng);
        let mut tags = vec![primary];
        if rng.random_bool(spec.multi_cashtag_fraction) {
            let extra = (1 + rng.random_range(0..2usize)).min(self.tickers.len() - 1);
            while tags.len() < 1 + extra {
                let t = rng.random_range(0..self.tickers.len());
                if !tags.contains(&t) {
                    tags.push(t);
                }
            }
        }
        let n_filler = self.filler.as_ref().map_or(0, |p| p.sample(rng) as u64);
        let mut body = format!("${}", self.tickers[primary].0);
        for _ in 0..n_filler {
            body.push(' ');
            body.push_str(VOCAB[rng.random_range(0..VOCAB.len())]);
        }
        for t in &tags[1..] {
            body.push_str(" $");
            body.push_str(self.tickers[*t].0.as_str());
        }
        let sentiment = if rng.random_bool(spec.unclassified_fraction) {
            SentimentLabel::Unclassified
        } else {
            let sector = self.tickers[primary].1;
            let day = self.cal.assign(created_at).ok();
            let p = day
                .map_or(spec.default_p, |d| spec.bullish_prob(sector, &user.profile, d, &self.cal))
                .clamp(0.0, 1.0);
            let bullish = rng.random_bool(p);
            if tags.len() == 1 {
                let regime = day
                    .and_then(|d| spec.regime_of(d))
                    .map_or_else(String::new, |r| spec.regimes[r].name.clone());
                let e = stats.cells.entry((sector, regime)).or_default();
                e.0 += 1;
                e.1 += bullish as u64;
                e.2 += p;
            }
            stats.classified += 1;
            stats.bullish += bullish as u64;
            if bullish {
                SentimentLabel::Bullish
            } else {
                SentimentLabel::Bearish
            }
        };
        let words = 1 + n_filler + (tags.len() as u64 - 1);
        stats.messages += 1;
        stats.multi += (tags.len() > 1) as u64;
        stats.trading_hours += in_trading as u64;
        stats.words += words;
        stats.words_sq += words * words;
        RawMessage {
            message_id: FIRST_MESSAGE_ID + index,
            user_id: user.id,
            body,
            created_at,
            sentiment,
            cashtags: tags.iter().map(|t| self.tickers[*t].0).collect(),
            profile: user.profile,
            followers: user.followers,
            following: user.following,
            ideas: user.ideas,
            likes: user.likes,
        }
    }

    fn manifest(&self, s: ChunkStats) -> SynthManifest {
        let spec = self.spec;
        let n = s.messages.max(1) as f64;
        let mean = s.words as f64 / n;
        let var = if s.messages > 1 {
            (s.words_sq as f64 - n * mean * mean) / (n - 1.0)
        } else {
            0.0
        };
        SynthManifest {
            generator: format!("belief-synth {}", env!("CARGO_PKG_VERSION")),
            rng: RNG_DESCRIPTION.into(),
            spec: spec.clone(),
            messages: s.messages,
            users: spec.users,
            classified: s.classified,
            bullish: s.bullish,
            multi_cashtag: s.multi,
            trading_hours_messages: s.trading_hours,
            expected_mean_words: 1.0 + spec.filler_words_mean + spec.multi_cashtag_fraction * self.expected_extra_cashtags(),
            realized_mean_words: mean,
            realized_words_std: var.max(0.0).sqrt(),
            cells: s
                .cells
                .into_iter()
                .map(|((sector, regime), (n, b, p))| CellTruth {
                    sector,
                    regime,
                    n_classified: n,
                    n_bullish: b,
                    mean_p: p / n as f64,
                })
                .collect(),
        }
    }

    fn run(&self, mut sink: impl FnMut(Vec<RawMessage>) -> std::io::Result<()>) -> std::io::Result<SynthManifest> {
        let n_chunks = self.spec.messages.div_ceil(CHUNK_MESSAGES);
        let batch = (rayon::current_num_threads() * 2) as u64;
        let mut total = ChunkStats::default();
        let mut c = 0;
        while c < n_chunks {
            let hi = (c + batch).min(n_chunks);
            let parts: Vec<_> = (c..hi).into_par_iter().map(|i| self.chunk(i)).collect();
            for (msgs, st) in parts {
                sink(msgs)?;
                total.merge(st);
            }
            c = hi;
        }
        Ok(self.manifest(total))
    }
}

/// Writes the corpus as NDJSON to `out`. Output depends only on the spec.
pub fn generate(spec: &SynthSpec, mut out: impl Write) -> Result<SynthManifest, SynthError> {
    spec.validate()?;
    let plan = Plan::new(spec);
    let io = |source| SynthError::Io {
        path: "<output>".into(),
        source,
    };
    let manifest = plan
        .run(|msgs| {
            let bytes: Vec<u8> = msgs
                .par_iter()
                .map(|m| {
                    let mut line = m.to_json_line();
                    line.push('\n');
                    line
                })
                .collect::<Vec<String>>()
                .concat()
                .into_bytes();
            out.write_all(&bytes)
        })
        .map_err(io)?;
    out.flush().map_err(io)?;
    Ok(manifest)
}

/// [`generate`] into a file, gzip-compressed when the name ends in `.gz`.
pub fn generate_to_path(spec: &SynthSpec, path: &Path) -> Result<SynthManifest, SynthError> {
    let io = |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = BufWriter::new(File::create(path).map_err(io)?);
    if path.extension().is_some_and(|e| e == "gz") {
        let mut gz = GzEncoder::new(file, Compression::fast());
        let m = generate(spec, &mut gz)?;
        gz.finish().map_err(io)?.flush().map_err(io)?;
        Ok(m)
    } else {
        generate(spec, file)
    }
}

/// The same corpus as [`generate`], in memory.
pub fn generate_messages(spec: &SynthSpec) -> Result<(Vec<RawMessage>, SynthManifest), SynthError> {
    spec.validate()?;
    let plan = Plan::new(spec);
    let mut all = Vec::with_capacity(spec.messages as usize);
    let manifest = plan
        .run(|msgs| {
            all.extend(msgs);
            Ok(())
        })
        .expect("in-memory sink does not fail");
    Ok((all, manifest))
}
