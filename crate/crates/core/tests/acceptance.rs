//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.
//!
//! `BELIEF_ACCEPTANCE=1,5` runs a subset.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use belief_core::analytics::{correlation_matrix, time_histograms, CorpusSummary};
use belief_core::catalog::{Category, InvestorProfile, Sector};
use belief_core::ingest::{parse_corpus, RawMessage, TradingCalendar};
use belief_core::metrics::{
    avg_sentiment, disagreement, sma, AggregationContext, BeliefSeries, Group1, Group1Dim, Group2, Group2Dim,
    GroupKey, SeriesKind, WindowMode,
};
use belief_core::pipeline::{self, all_products};
use belief_core::report::{load_daily_csv, BundleManifest, ReportProduct, MANIFEST_NAME};
use belief_core::synth::{generate, sector_prob_scenario, vshape_scenario, SynthSpec};
use belief_core::RunConfig;
use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(format!("{detail}; {:.2?} < {:.0?}", elapsed, limit))
    } else {
        Err(format!("{detail}; took {:.2?}, limit {:.0?}", elapsed, limit))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 ------------------------------------------------------------------------

fn population_std(n_bull: u64, n_bear: u64) -> f64 {
    let n = (n_bull + n_bear) as f64;
    let mean = (n_bull as f64 - n_bear as f64) / n;
    let ss = n_bull as f64 * (1.0 - mean).powi(2) + n_bear as f64 * (-1.0 - mean).powi(2);
    (ss / n).sqrt()
}

fn formula_identities() -> Outcome {
    let t = Instant::now();
    ensure(disagreement(0.0).unwrap() == 1.0, || "disagreement(0) != 1".into())?;
    ensure(disagreement(1.0).unwrap() == 0.0, || "disagreement(1) != 0".into())?;
    ensure(disagreement(-1.0).unwrap() == 0.0, || "disagreement(-1) != 0".into())?;
    for k in 1..=1000u64 {
        ensure(avg_sentiment(k, k).unwrap() == 0.0, || format!("avg_sentiment({k},{k}) != 0"))?;
    }
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n_bull in 0..100u64 {
        for n_bear in 1..=100u64 {
            let s = avg_sentiment(n_bull, n_bear).unwrap();
            let err = (disagreement(s).unwrap() - population_std(n_bull, n_bear)).abs();
            worst = worst.max(err);
            pairs += 1;
            ensure(err <= 1e-12, || format!("({n_bull},{n_bear}): error {err:e}"))?;
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(1),
        format!("{pairs} pairs, max |err| {worst:.1e}"),
    )
}

// 2 ------------------------------------------------------------------------

fn random_spec(rng: &mut ChaCha8Rng, i: usize) -> SynthSpec {
    let messages = rng.random_range(50..=10_000);
    let mut spec = if i % 4 == 0 {
        let mut s = vshape_scenario();
        s.messages = messages;
        s.users = (messages / 8).max(1);
        s
    } else {
        let mut sectors: Vec<(Sector, f64)> = Vec::new();
        for s in Sector::ALL.iter().copied().filter(|s| *s != Sector::Unknown) {
            if rng.random_bool(0.6) {
                sectors.push((s, rng.random_range(0.0..=1.0)));
            }
        }
        if sectors.is_empty() {
            sectors.push((Sector::Financial, 0.5));
        }
        sector_prob_scenario(rng.random(), messages, &sectors)
    };
    spec.seed = rng.random();
    spec.unclassified_fraction = rng.random_range(0.0..0.9);
    spec.multi_cashtag_fraction = rng.random_range(0.0..0.5);
    spec.trading_hours_mass = rng.random_range(0.0..=1.0);
    spec
}

fn corpus_of(spec: &SynthSpec) -> Vec<RawMessage> {
    let mut buf = Vec::new();
    generate(spec, &mut buf).unwrap();
    let (msgs, report) = parse_corpus(std::str::from_utf8(&buf).unwrap());
    assert!(report.rejects.is_empty(), "synthetic corpus has rejects");
    msgs
}

/// Independent close-to-close assignment: 16:00 New York on each session.
struct OracleDays {
    anchor_close: DateTime<Utc>,
    closes: Vec<(NaiveDate, DateTime<Utc>)>,
}

impl OracleDays {
    fn new(cal: &TradingCalendar) -> Self {
        let ny = chrono_tz::America::New_York;
        let closes = cal
            .sessions()
            .iter()
            .map(|day| {
                let close = ny.from_local_datetime(&day.and_hms_opt(16, 0, 0).unwrap()).unwrap();
                (*day, close.with_timezone(&Utc))
            })
            .collect();
        OracleDays {
            anchor_close: cal.coverage_start(),
            closes,
        }
    }

    fn day(&self, ts: DateTime<Utc>) -> Option<NaiveDate> {
        if ts <= self.anchor_close {
            return None;
        }
        self.closes.iter().find(|(_, c)| ts <= *c).map(|(d, _)| *d)
    }
}

fn oracle_g2(dim: Group2Dim, p: &InvestorProfile) -> String {
    match dim {
        Group2Dim::AllInvestors => "All Investors".into(),
        Group2Dim::Approach => p.approach.label().into(),
        Group2Dim::HoldingPeriod => p.holding_period.label().into(),
        Group2Dim::Experience => p.experience.label().into(),
    }
}

type OracleCell = (String, String, NaiveDate);

fn aggregation_oracle(
    msgs: &[RawMessage],
    spec: &SynthSpec,
    days: &OracleDays,
    g1: Group1Dim,
    g2: Group2Dim,
    excluded: &[Sector],
) -> BTreeMap<OracleCell, (u64, u64)> {
    let sectors: HashMap<String, Sector> = spec.tickers.iter().map(|t| (t.symbol.to_string(), t.sector)).collect();
    let mut out = BTreeMap::new();
    for m in msgs {
        let label = match m.sentiment.value() {
            Some(v) => v,
            None => continue,
        };
        if m.cashtags.len() != 1 {
            continue;
        }
        let Some(day) = days.day(m.created_at) else { continue };
        if day < spec.start || day > spec.end {
            continue;
        }
        let g1_label = match g1 {
            Group1Dim::AllFirms => "All Firms".to_string(),
            Group1Dim::Sector => {
                let s = sectors.get(m.cashtags[0].as_str()).copied().unwrap_or(Sector::Unknown);
                if excluded.contains(&s) {
                    continue;
                }
                s.label().to_string()
            }
            _ => unreachable!(),
        };
        let e: &mut (u64, u64) = out.entry((g1_label, oracle_g2(g2, &m.profile), day)).or_default();
        if label > 0 {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    out
}

fn aggregation_oracle_check() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let excluded = [Sector::Conglomerates];
    let (mut cells, mut corpora_msgs) = (0usize, 0usize);
    for i in 0..100 {
        let spec = random_spec(&mut rng, i);
        let msgs = corpus_of(&spec);
        corpora_msgs += msgs.len();
        let cal = spec.calendar();
        let catalog = spec.catalog();
        let ctx = AggregationContext {
            catalog: &catalog,
            calendar: &cal,
            from: spec.start,
            to: spec.end,
            excluded_sectors: excluded.to_vec(),
        };
        let (cube, _) = ctx.build_cube(&msgs);
        let days = OracleDays::new(&cal);
        for g1 in [Group1Dim::AllFirms, Group1Dim::Sector] {
            for g2 in Group2Dim::ALL {
                let want = aggregation_oracle(&msgs, &spec, &days, g1, g2, &excluded);
                let got = cube.rollup(g1, g2, &catalog, &excluded);
                ensure(got.len() == want.len(), || {
                    format!("corpus {i} {g1:?}x{g2:?}: {} cells, oracle {}", got.len(), want.len())
                })?;
                for a in &got {
                    let key = (a.key.group1.label(), a.key.group2.label().to_string(), a.day);
                    let Some(&(nb, nr)) = want.get(&key) else {
                        return Err(format!("corpus {i}: cell {key:?} not in oracle"));
                    };
                    ensure(a.n_bullish == nb && a.n_bearish == nr, || {
                        format!("corpus {i} {key:?}: counts ({},{}) vs ({nb},{nr})", a.n_bullish, a.n_bearish)
                    })?;
                    let s = (nb as f64 - nr as f64) / (nb + nr) as f64;
                    let dis = (1.0 - s * s).sqrt();
                    let (gs, gd) = (a.avg_sentiment.unwrap(), a.disagreement.unwrap());
                    ensure((gs - s).abs() <= 1e-12 && (gd - dis).abs() <= 1e-12, || {
                        format!("corpus {i} {key:?}: ({gs}, {gd}) vs ({s}, {dis})")
                    })?;
                    cells += 1;
                }
            }
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(30),
        format!("100 corpora, {corpora_msgs} messages, {cells} cells match"),
    )
}

// 3 ------------------------------------------------------------------------

fn series_of(values: Vec<Option<f64>>) -> BeliefSeries {
    let days = (0..values.len() as i64).map(|i| d(2020, 1, 1) + chrono::Days::new(i as u64)).collect();
    BeliefSeries::new(
        GroupKey {
            group1: Group1::AllFirms,
            group2: Group2::AllInvestors,
        },
        SeriesKind::Sentiment,
        days,
        values,
    )
}

fn naive_sma(v: &[Option<f64>], k: usize, min_obs: usize, lagged: bool) -> Vec<Option<f64>> {
    (0..v.len())
        .map(|t| {
            let (lo, hi) = if lagged {
                (t as i64 - k as i64, t as i64 - 1)
            } else {
                (t as i64 - k as i64 + 1, t as i64)
            };
            let mut sum = 0.0;
            let mut n = 0;
            for j in lo.max(0)..=hi {
                if let Some(x) = v[j as usize] {
                    sum += x;
                    n += 1;
                }
            }
            (n >= min_obs && n > 0).then(|| sum / n as f64)
        })
        .collect()
}

fn sma_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let len = rng.random_range(0..250);
        let miss = rng.random_range(0.0..0.7);
        let v: Vec<Option<f64>> = (0..len)
            .map(|_| (!rng.random_bool(miss)).then(|| rng.random_range(-1.0..=1.0)))
            .collect();
        let k = rng.random_range(1..=15);
        let m = rng.random_range(1..=k);
        let s = series_of(v.clone());
        for (mode, lagged) in [(WindowMode::Lagged, true), (WindowMode::Trailing, false)] {
            let got = sma(&s, k, m, mode).unwrap().values;
            let want = naive_sma(&v, k, m, lagged);
            for (t_, (g, w)) in got.iter().zip(&want).enumerate() {
                match (g, w) {
                    (Some(g), Some(w)) => {
                        worst = worst.max((g - w).abs());
                        ensure((g - w).abs() <= 1e-12, || format!("series {i} k={k} m={m} t={t_}: {g} vs {w}"))?;
                    }
                    (None, None) => {}
                    _ => return Err(format!("series {i} k={k} m={m} t={t_}: {g:?} vs {w:?}")),
                }
            }
        }
        // k = 1: lagged is a one-day shift, trailing the identity.
        let shift = sma(&s, 1, 1, WindowMode::Lagged).unwrap().values;
        let expect: Vec<Option<f64>> = std::iter::once(None).chain(v.iter().copied()).take(v.len()).collect();
        ensure(shift == expect, || format!("series {i}: k=1 lagged is not a shift"))?;
        ensure(sma(&s, 1, 1, WindowMode::Trailing).unwrap().values == v, || {
            format!("series {i}: k=1 trailing is not the identity")
        })?;
        // A constant series is a fixed point.
        let c = rng.random_range(-1.0..=1.0);
        let cs: Vec<Option<f64>> = v.iter().map(|x| x.map(|_| c)).collect();
        let once = sma(&series_of(cs), k, m, WindowMode::Lagged).unwrap().values;
        let twice = sma(&series_of(once.clone()), k, m, WindowMode::Lagged).unwrap().values;
        for x in once.iter().chain(&twice).flatten() {
            ensure((x - c).abs() <= 1e-12, || format!("series {i}: constant {c} smoothed to {x}"))?;
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(5),
        format!("1000 series x 2 modes, max |err| {worst:.1e}"),
    )
}

// 4 ------------------------------------------------------------------------

fn textbook_pearson(x: &[Option<f64>], y: &[Option<f64>], min_overlap: usize) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    if pairs.len() < min_overlap.max(2) {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = pairs.iter().map(|(a, _)| (a - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|(_, b)| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

fn correlation_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cutoff = d(2020, 2, 19);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for set in 0..50 {
        let n = rng.random_range(1..=9);
        let len = rng.random_range(5..120);
        let factor: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let series: Vec<Vec<Option<f64>>> = (0..n)
            .map(|_| {
                let w = rng.random_range(-1.0..1.0);
                let miss = rng.random_range(0.0..0.5);
                factor
                    .iter()
                    .map(|f| (!rng.random_bool(miss)).then(|| w * f + rng.random_range(-0.5..0.5)))
                    .collect()
            })
            .collect();
        let labels: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let min_overlap = rng.random_range(2..=12);
        let m = correlation_matrix(labels.clone(), &series, cutoff, false, min_overlap);
        for i in 0..n {
            ensure(m.entries[i][i] == Some(1.0), || format!("set {set}: diagonal {i} is {:?}", m.entries[i][i]))?;
            for j in 0..n {
                let (a, b) = (m.entries[i][j], m.entries[j][i]);
                ensure(a.map(f64::to_bits) == b.map(f64::to_bits), || format!("set {set}: asymmetric at {i},{j}"))?;
                if i == j {
                    continue;
                }
                match (a, textbook_pearson(&series[i], &series[j], min_overlap)) {
                    (Some(g), Some(w)) => {
                        worst = worst.max((g - w).abs());
                        ensure((g - w).abs() <= 1e-9, || format!("set {set} ({i},{j}): {g} vs {w}"))?;
                        compared += 1;
                    }
                    (None, None) => {}
                    (g, w) => return Err(format!("set {set} ({i},{j}): {g:?} vs {w:?}")),
                }
            }
        }
        // Positive affine maps of one series leave the matrix unchanged.
        let a = rng.random_range(0.01..100.0);
        let b = rng.random_range(-50.0..50.0);
        let k = rng.random_range(0..n);
        let mut moved = series.clone();
        moved[k] = moved[k].iter().map(|x| x.map(|v| a * v + b)).collect();
        let m2 = correlation_matrix(labels, &moved, cutoff, false, min_overlap);
        for i in 0..n {
            for j in 0..n {
                match (m.entries[i][j], m2.entries[i][j]) {
                    (Some(x), Some(y)) => {
                        ensure((x - y).abs() <= 1e-9, || format!("set {set}: affine changed ({i},{j}) {x} -> {y}"))?
                    }
                    (None, None) => {}
                    (x, y) => return Err(format!("set {set}: affine changed ({i},{j}) {x:?} -> {y:?}")),
                }
            }
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(5),
        format!("50 sets, {compared} entries, max |err| {worst:.1e}"),
    )
}

// 5, 6, 8 (shared V-shape bundle) -------------------------------------------

struct VshapeRun {
    _dir: tempfile::TempDir,
    bundle: PathBuf,
    spec: SynthSpec,
    cfg: RunConfig,
    elapsed: Duration,
}

fn vshape_run() -> Result<VshapeRun, String> {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let syn = dir.path().join("synth");
    let synth_cfg = RunConfig {
        out: syn.clone(),
        ..RunConfig::default()
    };
    let manifest = pipeline::cmd_synth(&synth_cfg).map_err(|e| e.to_string())?;
    let cfg = RunConfig::load(&syn.join("run.toml")).map_err(|e| e.to_string())?;
    pipeline::cmd_all(&cfg).map_err(|e| e.to_string())?;
    Ok(VshapeRun {
        bundle: cfg.out.clone(),
        _dir: dir,
        spec: manifest.spec,
        cfg,
        elapsed: t.elapsed(),
    })
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn synthetic_recovery(run: &VshapeRun) -> Outcome {
    let spec = &run.spec;
    let cal = spec.calendar();
    let sessions = cal.sessions_between(run.cfg.from, run.cfg.to);
    let trough = d(2020, 3, 23);

    // (a) smoothed all-investor sentiment minimum.
    let sma_rows = load_daily_sma(&read(&run.bundle.join("sentiment_sma__all__all.csv"))?)?;
    let (min_day, min_val) = sma_rows
        .iter()
        .filter_map(|(day, s)| Some((*day, (*s)?)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or("empty smoothed series")?;
    let pos = |day: NaiveDate| sessions.iter().position(|s| *s == day).unwrap() as i64;
    let offset = pos(min_day) - pos(trough);
    ensure(offset.abs() <= 3, || format!("(a) minimum {min_val:.3} on {min_day}, {offset:+} sessions"))?;

    // (b) per-sector mean daily sentiment against 2p-1.
    let rows = load_daily_csv(&read(&run.bundle.join("sentiment_daily__sector__all.csv"))?).map_err(|e| e.to_string())?;
    let any_profile = InvestorProfile::default();
    let mut by_sector: BTreeMap<String, Vec<(NaiveDate, u64, f64)>> = BTreeMap::new();
    for r in rows {
        by_sector
            .entry(r.group1.clone())
            .or_default()
            .push((r.day, r.n_bullish + r.n_bearish, r.avg_sentiment.unwrap()));
    }
    let mut means: BTreeMap<String, f64> = BTreeMap::new();
    let mut worst_z = 0.0f64;
    for (label, days) in &by_sector {
        let sector = Sector::lookup(label).ok_or_else(|| format!("unknown sector {label}"))?;
        let n = days.len() as f64;
        let mean = days.iter().map(|x| x.2).sum::<f64>() / n;
        let (mut expect, mut var) = (0.0, 0.0);
        for (day, count, _) in days {
            let p = spec.bullish_prob(sector, &any_profile, *day, &cal);
            expect += 2.0 * p - 1.0;
            var += 4.0 * p * (1.0 - p) / *count as f64;
        }
        expect /= n;
        let se = var.sqrt() / n;
        let z = (mean - expect).abs() / se;
        worst_z = worst_z.max(z);
        ensure(z <= 3.0, || format!("(b) {label}: mean {mean:.4} vs 2p-1 {expect:.4}, {z:.2} s.e."))?;
        means.insert(label.clone(), mean);
    }
    // (c) ordering.
    let (h, f) = (means["Healthcare"], means["Financial"]);
    ensure(h > f, || format!("(c) Healthcare {h:.3} <= Financial {f:.3}"))?;
    within(
        run.elapsed,
        Duration::from_secs(120),
        format!(
            "{} msgs; SMA min {min_day} ({offset:+} sessions); {} sectors within {worst_z:.2} s.e.; Healthcare {h:.3} > Financial {f:.3}",
            spec.messages,
            means.len()
        ),
    )
}

fn load_daily_sma(bytes: &[u8]) -> Result<Vec<(NaiveDate, Option<f64>)>, String> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize::<(String, String, NaiveDate, Option<f64>, Option<f64>)>()
        .map(|row| row.map(|(_, _, day, s, _)| (day, s)).map_err(|e| e.to_string()))
        .collect()
}

fn row_invariant(bundles: &[&Path]) -> Outcome {
    let mut rows = 0usize;
    let mut tables = 0usize;
    for dir in bundles {
        let manifest = BundleManifest::load(dir).map_err(|e| e.to_string())?;
        for f in manifest.files.iter().filter(|f| f.name.starts_with("sentiment_daily__")) {
            tables += 1;
            let parsed = load_daily_csv(&read(&dir.join(&f.name))?).map_err(|e| e.to_string())?;
            for r in parsed {
                let (s, dis) = (r.avg_sentiment.unwrap(), r.disagreement.unwrap());
                let err = (dis - (1.0 - s * s).sqrt()).abs();
                ensure(err <= 1e-12, || format!("{} {} {} {}: |err| {err:e}", f.name, r.group1, r.group2, r.day))?;
                rows += 1;
            }
        }
    }
    ensure(rows > 0, || "no daily rows found".into())?;
    Ok(format!("{rows} rows in {tables} daily tables, 100% within 1e-12"))
}

fn histogram_partition(run: &VshapeRun) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..20 {
        let spec = random_spec(&mut rng, i);
        let msgs = corpus_of(&spec);
        let h = time_histograms(msgs.iter().map(|m| m.created_at), chrono_tz::America::New_York);
        let n = msgs.len() as u64;
        ensure(h.hours.iter().sum::<u64>() == n && h.weekdays.iter().sum::<u64>() == n, || {
            format!("corpus {i}: bins do not sum to {n}")
        })?;
    }
    let summary: CorpusSummary = serde_json::from_slice(&read(&run.bundle.join("corpus.json"))?).map_err(|e| e.to_string())?;
    let h = &summary.hist;
    let n = summary.n_messages;
    ensure(h.hours.iter().sum::<u64>() == n && h.weekdays.iter().sum::<u64>() == n, || {
        "V-shape corpus bins do not sum to corpus size".into()
    })?;
    let target = run.spec.trading_hours_mass;
    let frac = h.trading_mass as f64 / n as f64;
    let se = (target * (1.0 - target) / n as f64).sqrt();
    let z = (frac - target).abs() / se;
    ensure(z <= 3.0, || format!("trading share {frac:.4} vs {target}, {z:.2} s.e."))?;
    Ok(format!(
        "21 corpora partition exactly; trading share {frac:.4} vs {target} ({z:.2} s.e., n={n})"
    ))
}

// 7 ------------------------------------------------------------------------

const PAPER_SCALE: u64 = 3_676_169;

fn scale_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let syn = dir.path().join("synth");
    let t = Instant::now();
    let manifest = pipeline::cmd_synth(&RunConfig {
        out: syn.clone(),
        synth_messages: Some(PAPER_SCALE),
        ..RunConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let gen_time = t.elapsed();
    ensure(manifest.messages == PAPER_SCALE, || format!("generated {}", manifest.messages))?;
    let base = RunConfig::load(&syn.join("run.toml")).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for (jobs, shard_lines, name) in [(1, 4_096, "a"), (4, 100_000, "b")] {
        let cfg = RunConfig {
            jobs,
            shard_lines,
            out: dir.path().join(name),
            ..base.clone()
        };
        let t = Instant::now();
        pipeline::cmd_all(&cfg).map_err(|e| e.to_string())?;
        runs.push((cfg.out, t.elapsed()));
    }
    let ingest: serde_json::Value = serde_json::from_slice(&read(&runs[0].0.join("ingest.json"))?).map_err(|e| e.to_string())?;
    ensure(ingest["rejected"] == 0 && ingest["accepted"] == PAPER_SCALE, || format!("ingest report {ingest}"))?;
    let ma = read(&runs[0].0.join(MANIFEST_NAME))?;
    let mb = read(&runs[1].0.join(MANIFEST_NAME))?;
    ensure(ma == mb, || "manifests differ between shard/job settings".into())?;
    let files = BundleManifest::load(&runs[0].0).map_err(|e| e.to_string())?.files;
    for f in &files {
        ensure(read(&runs[0].0.join(&f.name))? == read(&runs[1].0.join(&f.name))?, || {
            format!("{} differs", f.name)
        })?;
    }
    let slowest = runs.iter().map(|r| r.1).max().unwrap();
    within(
        slowest,
        Duration::from_secs(300),
        format!(
            "{PAPER_SCALE} msgs (generated in {gen_time:.1?}), 0 rejects, {} files byte-identical across jobs 1/4 and shards 4096/100000; cmd_all {:.1?} / {:.1?}",
            files.len() + 1,
            runs[0].1,
            runs[1].1
        ),
    )
}

// 9 ------------------------------------------------------------------------

const STATS_HEADER: &str = "count,mean,std,min,25%,50%,75%,max";

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn is_golden(name: &str) -> bool {
    name.ends_with(".csv")
        && ["characteristics__", "profiles__", "top__", "hist__", "sentiment_stats__", "sector_stats__", "corr__sector__"]
            .iter()
            .any(|p| name.starts_with(p))
}

/// Fixed-seed corpus the goldens are produced from.
pub fn golden_products() -> Result<Vec<ReportProduct>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let syn = dir.path().join("synth");
    pipeline::cmd_synth(&RunConfig {
        out: syn.clone(),
        seed: Some(9),
        synth_messages: Some(40_000),
        ..RunConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let cfg = RunConfig::load(&syn.join("run.toml")).map_err(|e| e.to_string())?;
    let products = all_products(&cfg).map_err(|e| e.to_string())?;
    Ok(products.into_iter().filter(|p| is_golden(&p.name)).collect())
}

fn check_layout(p: &ReportProduct) -> Result<(), String> {
    let text = std::str::from_utf8(&p.bytes).map_err(|e| e.to_string())?;
    ensure(!text.contains('\r'), || format!("{}: CR line ending", p.name))?;
    let header = text.lines().next().unwrap_or_default();
    if p.name.starts_with("characteristics__") || p.name.contains("_stats__") {
        ensure(header.ends_with(&format!(",{STATS_HEADER}")), || format!("{}: header {header:?}", p.name))?;
    }
    if p.name.starts_with("corr__") {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(p.bytes.as_slice());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            if i == 0 {
                ensure(rec[0].is_empty(), || format!("{}: corner cell not empty", p.name))?;
                continue;
            }
            ensure(rec.iter().skip(1 + i).all(str::is_empty), || format!("{}: row {i} above diagonal", p.name))?;
            ensure(&rec[i] == "1", || format!("{}: diagonal {i} is {:?}", p.name, &rec[i]))?;
        }
    }
    Ok(())
}

fn golden_format() -> Outcome {
    let products = golden_products()?;
    let dir = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        for p in &products {
            std::fs::write(dir.join(&p.name), &p.bytes).map_err(|e| e.to_string())?;
        }
    }
    let mut checked = 0;
    for p in &products {
        check_layout(p)?;
        let want = read(&dir.join(&p.name))?;
        ensure(want == p.bytes, || format!("{} differs from golden", p.name))?;
        checked += 1;
    }
    let on_disk = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.count();
    ensure(on_disk == checked, || format!("{on_disk} goldens on disk, {checked} produced"))?;
    ensure(products.iter().any(|p| p.name.starts_with("corr__")), || "no matrix produced".into())?;
    Ok(format!("{checked} CSVs byte-identical to goldens; stats headers and lower-triangle layout verified"))
}

// ---------------------------------------------------------------------------

fn main() {
    let selected: Option<Vec<u32>> = std::env::var("BELIEF_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wants = |n: u32| selected.as_ref().is_none_or(|s| s.contains(&n));
    // Criteria 5, 6 and 8 share one V-shape bundle.
    let vshape = (wants(5) || wants(6) || wants(8)).then(vshape_run);
    let with_vshape = |f: fn(&VshapeRun) -> Outcome| match &vshape {
        Some(Ok(run)) => f(run),
        Some(Err(e)) => Err(format!("V-shape run failed: {e}")),
        None => unreachable!(),
    };

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "formula identities", Box::new(formula_identities)),
        (2, "aggregation oracle", Box::new(aggregation_oracle_check)),
        (3, "SMA oracle", Box::new(sma_oracle)),
        (4, "correlation oracle", Box::new(correlation_oracle)),
        (5, "synthetic recovery", Box::new(|| with_vshape(synthetic_recovery))),
        (
            6,
            "daily-table row invariant",
            Box::new(|| with_vshape(|run| row_invariant(&[&run.bundle]))),
        ),
        (7, "ingest robustness and determinism", Box::new(scale_determinism)),
        (8, "histogram partition", Box::new(|| with_vshape(histogram_partition))),
        (9, "golden formats", Box::new(golden_format)),
    ];
    let mut failed = 0;
    for (n, name, f) in &criteria {
        if !wants(*n) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {n} [{name}]: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} [{name}]: FAIL ({detail})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
