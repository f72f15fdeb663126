use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::{ProbRule, ProfileMix, Regime, SynthSpec, SynthTicker};
use crate::catalog::Sector;
use crate::ingest::Ticker;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn mix(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// User shares of each profile category in percent.
fn observed_profile_mix() -> ProfileMix {
    ProfileMix {
        approach: mix(&[
            ("Technical", 5.92),
            ("Growth", 3.44),
            ("Momentum", 3.42),
            ("Fundamental", 2.48),
            ("Value", 1.86),
            ("Global Macro", 0.78),
            ("Not Classified", 82.10),
        ]),
        holding_period: mix(&[
            ("Swing Trader", 6.85),
            ("Long Term Investor", 4.51),
            ("Day Trader", 3.61),
            ("Position Trader", 2.98),
            ("Not Classified", 82.05),
        ]),
        experience: mix(&[
            ("Novice", 4.92),
            ("Intermediate", 8.46),
            ("Professional", 4.72),
            ("Not Classified", 81.91),
        ]),
    }
}

fn ticker(symbol: &str, sector: Sector, industry: &str, weight: f64) -> SynthTicker {
    SynthTicker {
        symbol: Ticker::parse(symbol).unwrap(),
        sector,
        industry: industry.into(),
        weight,
    }
}

fn universe() -> Vec<SynthTicker> {
    use Sector::*;
    vec![
        ticker("SPY", Financial, "Exchange Traded Fund", 10.0),
        ticker("JPM", Financial, "Money Center Banks", 2.0),
        ticker("BAC", Financial, "Money Center Banks", 2.0),
        ticker("TSLA", ConsumerGoods, "Auto Manufacturers - Major", 5.0),
        ticker("NIO", ConsumerGoods, "Auto Manufacturers - Major", 2.0),
        ticker("KO", ConsumerGoods, "Beverages - Soft Drinks", 1.0),
        ticker("AAPL", Technology, "Personal Computers", 4.0),
        ticker("MSFT", Technology, "Application Software", 2.0),
        ticker("AMD", Technology, "Semiconductor - Broad Line", 2.0),
        ticker("GILD", Healthcare, "Biotechnology", 3.0),
        ticker("MRNA", Healthcare, "Biotechnology", 3.0),
        ticker("INO", Healthcare, "Biotechnology", 3.0),
        ticker("AMZN", Services, "Catalog & Mail Order Houses", 3.0),
        ticker("CCL", Services, "Resorts & Casinos", 2.0),
        ticker("BA", IndustrialGoods, "Aerospace/Defense Products & Services", 2.0),
        ticker("CAT", IndustrialGoods, "Farm & Construction Machinery", 1.0),
        ticker("XOM", BasicMaterials, "Major Integrated Oil & Gas", 2.0),
        ticker("GLD", BasicMaterials, "Gold", 2.0),
        ticker("NEE", Utilities, "Electric Utilities", 1.5),
        ticker("DUK", Utilities, "Electric Utilities", 1.5),
        ticker("GE", Conglomerates, "Conglomerates", 1.0),
    ]
}

/// Baseline bullish probability per sector, `(1 + mean daily sentiment) / 2`
/// for the sentiment levels reported per sector.
fn sector_base_p() -> Vec<(Sector, f64)> {
    use Sector::*;
    vec![
        (BasicMaterials, 0.835),
        (Technology, 0.785),
        (Healthcare, 0.9),
        (IndustrialGoods, 0.74),
        (Services, 0.704),
        (ConsumerGoods, 0.656),
        (Financial, 0.6),
        (Utilities, 0.922),
        (Conglomerates, 0.7),
    ]
}

const DECLINE: f64 = 0.3;
const TROUGH_REBOUND: f64 = 0.05;

/// High market until 2020-02-19, a linear decline to 2020-03-23 and a
/// recovery through 2020-03-31: sentiment traces a V, disagreement a
/// mirrored peak.
pub fn vshape_scenario() -> SynthSpec {
    let rules = |f: &dyn Fn(f64) -> (f64, Option<f64>)| -> Vec<ProbRule> {
        sector_base_p()
            .into_iter()
            .map(|(sector, p)| {
                let (p, p_end) = f(p);
                ProbRule {
                    sector: Some(sector),
                    approach: None,
                    holding_period: None,
                    experience: None,
                    p,
                    p_end,
                }
            })
            .collect()
    };
    SynthSpec {
        seed: 20200323,
        start: d(2019, 11, 30),
        end: d(2020, 3, 31),
        messages: 500_000,
        users: 50_000,
        profiles: observed_profile_mix(),
        tickers: universe(),
        default_p: 0.7,
        regimes: vec![
            Regime {
                name: "high".into(),
                start: d(2019, 11, 30),
                end: d(2020, 2, 19),
                default_p: None,
                rules: rules(&|p| (p, None)),
            },
            Regime {
                name: "decline".into(),
                start: d(2020, 2, 20),
                end: d(2020, 3, 23),
                default_p: None,
                rules: rules(&|p| (p, Some(p - DECLINE))),
            },
            Regime {
                name: "recovery".into(),
                start: d(2020, 3, 24),
                end: d(2020, 3, 31),
                default_p: None,
                rules: rules(&|p| (p - DECLINE + TROUGH_REBOUND, Some(p))),
            },
        ],
        day_weights: BTreeMap::new(),
        unclassified_fraction: 0.5,
        multi_cashtag_fraction: 0.12,
        trading_hours_mass: 0.8,
        filler_words_mean: 14.0,
        negative_count_fraction: 0.001,
        user_activity_skew: 0.8,
    }
}

/// Flat per-sector probabilities over a single regime-free period.
pub fn sector_prob_scenario(seed: u64, messages: u64, sector_p: &[(Sector, f64)]) -> SynthSpec {
    let tickers: Vec<SynthTicker> = universe()
        .into_iter()
        .filter(|t| sector_p.iter().any(|(s, _)| *s == t.sector))
        .collect();
    SynthSpec {
        seed,
        start: d(2020, 1, 1),
        end: d(2020, 2, 28),
        messages,
        users: (messages / 10).max(1),
        profiles: observed_profile_mix(),
        tickers,
        default_p: 0.5,
        regimes: vec![Regime {
            name: "flat".into(),
            start: d(2020, 1, 1),
            end: d(2020, 2, 28),
            default_p: None,
            rules: sector_p
                .iter()
                .map(|(s, p)| ProbRule {
                    sector: Some(*s),
                    approach: None,
                    holding_period: None,
                    experience: None,
                    p: *p,
                    p_end: None,
                })
                .collect(),
        }],
        day_weights: BTreeMap::new(),
        unclassified_fraction: 0.3,
        multi_cashtag_fraction: 0.1,
        trading_hours_mass: 0.8,
        filler_words_mean: 10.0,
        negative_count_fraction: 0.0,
        user_activity_skew: 0.8,
    }
}
