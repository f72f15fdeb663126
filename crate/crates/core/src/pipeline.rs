//! Stage orchestration behind the CLI subcommands.
//!
//! `ingest` writes an aggregate store (`<out>/store`); `stats`, `series` and
//! `correlate` read it back and write their own bundles under `<out>`;
//! `all` runs everything in memory and writes one flat bundle into `<out>`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    disagreement_corr_matrix, summary_stats, top_k_from_counts, AnalyticsError, CorpusSummary, CorrOptions,
    MessageDigest, StatsRow, SummaryBuilder, TopKey,
};
use crate::catalog::{Category, Sector, TickerCatalog};
use crate::config::{ConfigError, RunConfig};
use crate::ingest::{ingest_files, IngestOptions, IngestReport, Stopwords, TradingCalendar};
use crate::metrics::{
    materialize, smoothed_pair, AggregationContext, CountCube, CubeStats, Group1, Group1Dim, Group2Dim,
};
use crate::report::{
    corpus_json, daily_table_csv, emit_bundle, hist_hour_csv, hist_weekday_csv, matrix_csv, matrix_json,
    profile_table_csv, rejects_ndjson, series_table_csv, stats_table_csv, top_k_csv, BundleManifest, ReportError,
    ReportProduct,
};
use crate::synth::{generate_to_path, vshape_scenario, SynthError, SynthManifest, SynthSpec};

pub const STORE_DIR: &str = "store";
pub const CUBE_FILE: &str = "cube.csv";
pub const CORPUS_FILE: &str = "corpus.json";
pub const INGEST_FILE: &str = "ingest.json";
pub const SYNTH_CORPUS: &str = "corpus.ndjson.gz";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing upstream product {path}: {hint}")]
    MissingUpstream { path: String, hint: String },
    #[error("{0}")]
    Io(String),
    #[error("{0} already holds a bundle; pass --force to overwrite")]
    RefusesOverwrite(String),
    #[error("bad input {what}: {detail}")]
    Input { what: String, detail: String },
}

impl PipelineError {
    /// Stable machine-readable error class.
    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "ConfigError",
            PipelineError::MissingUpstream { .. } => "MissingUpstream",
            PipelineError::Io(_) => "IoError",
            PipelineError::RefusesOverwrite(_) => "RefusesOverwrite",
            PipelineError::Input { .. } => "InputError",
        }
    }
}

impl From<ReportError> for PipelineError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Load { what, detail } => PipelineError::Input { what, detail },
            ReportError::RefusesOverwrite(dir) => PipelineError::RefusesOverwrite(dir),
            e => PipelineError::Io(e.to_string()),
        }
    }
}

impl From<SynthError> for PipelineError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Io { .. } => PipelineError::Io(e.to_string()),
            e => PipelineError::Config(ConfigError::Invalid(e.to_string())),
        }
    }
}

fn input_err(what: &Path) -> impl Fn(String) -> PipelineError + '_ {
    move |detail| PipelineError::Input {
        what: what.display().to_string(),
        detail,
    }
}

/// Catalog, calendar and stopwords named by a config.
#[derive(Debug, Clone)]
pub struct Resources {
    pub catalog: TickerCatalog,
    pub calendar: TradingCalendar,
    pub stopwords: Stopwords,
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self, PipelineError> {
        let catalog = match &cfg.catalog {
            Some(p) => TickerCatalog::load(p).map_err(|e| input_err(p)(e.to_string()))?,
            None => TickerCatalog::default(),
        };
        let calendar = match &cfg.calendar {
            Some(p) => TradingCalendar::load(p).map_err(|e| input_err(p)(e.to_string()))?,
            None => TradingCalendar::us_equities(cfg.from, cfg.to),
        };
        let stopwords = match &cfg.stopwords {
            Some(p) => Stopwords::load(p).map_err(|e| input_err(p)(e.to_string()))?,
            None => Stopwords::english(),
        };
        Ok(Resources {
            catalog,
            calendar,
            stopwords,
        })
    }

    pub fn context<'a>(&'a self, cfg: &RunConfig) -> AggregationContext<'a> {
        AggregationContext {
            catalog: &self.catalog,
            calendar: &self.calendar,
            from: cfg.from,
            to: cfg.to,
            excluded_sectors: cfg.exclude_sectors.clone(),
        }
    }

    /// Trading days of the sample.
    pub fn days(&self, cfg: &RunConfig) -> Vec<NaiveDate> {
        self.calendar.sessions_between(cfg.from, cfg.to).to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub lines: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub cube: CubeStats,
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub summary: CorpusSummary,
    pub cube: CountCube,
    pub cube_stats: CubeStats,
    pub report: IngestReport,
}

impl IngestOutcome {
    pub fn ingest_summary(&self) -> IngestSummary {
        IngestSummary {
            lines: self.report.lines,
            accepted: self.report.accepted,
            rejected: self.report.rejects.len() as u64,
            cube: self.cube_stats,
        }
    }
}

/// Reads every input once, producing the corpus summary and the count cube.
pub fn ingest(cfg: &RunConfig, res: &Resources) -> Result<IngestOutcome, PipelineError> {
    if cfg.inputs.is_empty() {
        return Err(ConfigError::Invalid("no input files given".into()).into());
    }
    let ctx = res.context(cfg);
    let mut builder = SummaryBuilder::new(res.calendar.tz());
    let report = ingest_files(
        &cfg.inputs,
        IngestOptions {
            shard_lines: cfg.shard_lines,
        },
        |m| MessageDigest::new(&m, &ctx, &res.stopwords),
        |d| builder.push(d),
    )
    .map_err(|e| PipelineError::Io(e.to_string()))?;
    let (summary, cube, cube_stats) = builder.finish();
    log::info!(
        "ingested {} lines: {} accepted, {} rejected, {} counted toward sentiment",
        report.lines,
        report.accepted,
        report.rejects.len(),
        cube_stats.counted
    );
    Ok(IngestOutcome {
        summary,
        cube,
        cube_stats,
        report,
    })
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializes");
    b.push(b'\n');
    b
}

pub fn store_products(o: &IngestOutcome) -> Vec<ReportProduct> {
    vec![
        ReportProduct::new(CUBE_FILE, o.cube.to_csv()),
        ReportProduct::new(CORPUS_FILE, corpus_json(&o.summary)),
        ReportProduct::new(INGEST_FILE, json_bytes(&o.ingest_summary())),
        ReportProduct::new("rejects.ndjson", rejects_ndjson(&o.report.rejects)),
    ]
}

fn stats_rows(groups: BTreeMap<String, Vec<f64>>, order: &[String]) -> Vec<StatsRow> {
    order
        .iter()
        .filter_map(|label| {
            let stats = summary_stats(groups.get(label)?).ok()?;
            Some(StatsRow {
                label: label.clone(),
                stats,
            })
        })
        .collect()
}

/// Corpus characterization, profile, frequency and grouped sentiment tables.
pub fn stats_products(cfg: &RunConfig, res: &Resources, summary: &CorpusSummary, cube: &CountCube) -> Vec<ReportProduct> {
    let mut out = vec![
        ReportProduct::new(
            "characteristics__users.csv",
            stats_table_csv("Users", &summary.user_characteristics()),
        ),
        ReportProduct::new(
            "characteristics__messages.csv",
            stats_table_csv("Messages", &summary.message_features()),
        ),
        ReportProduct::new("hist__hour.csv", hist_hour_csv(&summary.hist)),
        ReportProduct::new("hist__weekday.csv", hist_weekday_csv(&summary.hist)),
    ];
    for t in summary.profile_tables() {
        out.push(ReportProduct::new(format!("profiles__{}.csv", t.slug), profile_table_csv(&t)));
    }
    for (key, k) in [
        (TopKey::Cashtag, Some(cfg.top_cashtags)),
        (TopKey::Industry, Some(cfg.top_industries)),
        (TopKey::Sector, None),
    ] {
        let entries = top_k_from_counts(&summary.cashtags, key, &res.catalog, k);
        out.push(ReportProduct::new(format!("top__{}.csv", key.slug()), top_k_csv(key, &entries)));
    }

    // Investor-class sentiment over firm x day cells.
    for dim in [Group2Dim::Approach, Group2Dim::HoldingPeriod, Group2Dim::Experience] {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        for a in cube.rollup(Group1Dim::Firm, dim, &res.catalog, &[]) {
            if a.key.group2.is_unclassified() {
                continue;
            }
            if let Some(s) = a.avg_sentiment {
                groups.entry(a.key.group2.label().to_string()).or_default().push(s);
            }
        }
        for label in groups.keys() {
            order.push(label.clone());
        }
        order.sort_by_key(|l| category_rank(dim, l));
        out.push(ReportProduct::new(
            format!("sentiment_stats__{}.csv", dim.slug()),
            stats_table_csv(dim.title(), &stats_rows(groups, &order)),
        ));
    }

    // Sector-level daily message counts (zero-filled over sessions),
    // sentiment and disagreement.
    let days = res.days(cfg);
    let mut counts: BTreeMap<Sector, BTreeMap<NaiveDate, u64>> = BTreeMap::new();
    let mut sent: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dis: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for a in cube.rollup(Group1Dim::Sector, Group2Dim::AllInvestors, &res.catalog, &cfg.exclude_sectors) {
        let Group1::Sector(sector) = a.key.group1 else { continue };
        if sector == Sector::Unknown {
            continue;
        }
        counts.entry(sector).or_default().insert(a.day, a.n_bullish + a.n_bearish);
        let label = sector.label().to_string();
        if let (Some(s), Some(d)) = (a.avg_sentiment, a.disagreement) {
            sent.entry(label.clone()).or_default().push(s);
            dis.entry(label).or_default().push(d);
        }
    }
    let order: Vec<String> = counts.keys().map(|s| s.label().to_string()).collect();
    let count_groups: BTreeMap<String, Vec<f64>> = counts
        .iter()
        .map(|(s, by_day)| {
            let v = days.iter().map(|d| by_day.get(d).copied().unwrap_or(0) as f64).collect();
            (s.label().to_string(), v)
        })
        .collect();
    for (name, groups) in [("count", count_groups), ("sentiment", sent), ("disagreement", dis)] {
        out.push(ReportProduct::new(
            format!("sector_stats__{name}.csv"),
            stats_table_csv("Sector", &stats_rows(groups, &order)),
        ));
    }
    out
}

fn category_rank(dim: Group2Dim, label: &str) -> usize {
    use crate::catalog::{Approach, Experience, HoldingPeriod};
    fn rank<C: Category>(label: &str) -> usize {
        C::ALL.iter().position(|c| c.label() == label).unwrap_or(usize::MAX)
    }
    match dim {
        Group2Dim::AllInvestors => 0,
        Group2Dim::Approach => rank::<Approach>(label),
        Group2Dim::HoldingPeriod => rank::<HoldingPeriod>(label),
        Group2Dim::Experience => rank::<Experience>(label),
    }
}

/// Daily and smoothed sentiment/disagreement tables for every configured grouping.
pub fn series_products(cfg: &RunConfig, res: &Resources, cube: &CountCube) -> Result<Vec<ReportProduct>, PipelineError> {
    let days = res.days(cfg);
    let mut out = Vec::new();
    for g in &cfg.groups {
        let aggs = cube.rollup(g.group1, g.group2, &res.catalog, &cfg.exclude_sectors);
        out.push(ReportProduct::new(
            format!("sentiment_daily__{}.csv", g.slug()),
            daily_table_csv(&aggs),
        ));
        let pairs = materialize(&aggs, &days)
            .iter()
            .map(|raw| smoothed_pair(raw, &cfg.smoothing))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        out.push(ReportProduct::new(
            format!("sentiment_sma__{}.csv", g.slug()),
            series_table_csv(&pairs),
        ));
    }
    Ok(out)
}

/// Disagreement correlation matrices per dimension and economy state, without
/// (`corr__<dim>__<state>`) and with (`..__rw`) smoothing. A matrix whose
/// groups lack data up to the cutoff is skipped with a warning.
pub fn corr_products(cfg: &RunConfig, res: &Resources, cube: &CountCube) -> Vec<ReportProduct> {
    let opts = CorrOptions {
        days: res.days(cfg),
        smoothing: cfg.smoothing,
        min_overlap: cfg.min_overlap,
    };
    let mut out = Vec::new();
    for dim in &cfg.corr_dims {
        let (g1, g2) = dim.dims();
        let aggs = cube.rollup(g1, g2, &res.catalog, &cfg.exclude_sectors);
        for state in &cfg.states {
            for smoothed in [false, true] {
                let stem = format!("corr__{}__{}{}", dim.slug(), state.slug(), if smoothed { "__rw" } else { "" });
                match disagreement_corr_matrix(&aggs, *dim, state, smoothed, &opts) {
                    Ok(m) => {
                        out.push(ReportProduct::new(format!("{stem}.csv"), matrix_csv(&m)));
                        out.push(ReportProduct::new(format!("{stem}.json"), matrix_json(&m)));
                    }
                    Err(AnalyticsError::InsufficientData(why)) => log::warn!("skipping {stem}: {why}"),
                    Err(e) => log::warn!("skipping {stem}: {e}"),
                }
            }
        }
    }
    out
}

/// Runs `f` on a pool with `cfg.jobs` workers (0: one per core).
pub fn with_jobs<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| PipelineError::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn store_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.join(STORE_DIR)
}

fn read_upstream(path: &Path) -> Result<Vec<u8>, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingUpstream {
            path: path.display().to_string(),
            hint: "run `belief ingest` first".into(),
        });
    }
    fs::read(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

fn load_cube(cfg: &RunConfig) -> Result<CountCube, PipelineError> {
    let path = store_dir(cfg).join(CUBE_FILE);
    let bytes = read_upstream(&path)?;
    CountCube::from_csv(bytes.as_slice()).map_err(input_err(&path))
}

fn load_summary(cfg: &RunConfig) -> Result<CorpusSummary, PipelineError> {
    let path = store_dir(cfg).join(CORPUS_FILE);
    let bytes = read_upstream(&path)?;
    serde_json::from_slice(&bytes).map_err(|e| input_err(&path)(e.to_string()))
}

fn emit(cfg: &RunConfig, products: &[ReportProduct], dir: &Path) -> Result<BundleManifest, PipelineError> {
    let m = emit_bundle(products, &cfg.snapshot(), dir, cfg.force)?;
    log::info!("wrote {} files to {} (run {})", m.files.len(), dir.display(), m.run_id);
    Ok(m)
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<BundleManifest, PipelineError> {
    cfg.validate()?;
    with_jobs(cfg, || {
        let res = Resources::load(cfg)?;
        let o = ingest(cfg, &res)?;
        emit(cfg, &store_products(&o), &store_dir(cfg))
    })?
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<BundleManifest, PipelineError> {
    cfg.validate()?;
    with_jobs(cfg, || {
        let cube = load_cube(cfg)?;
        let summary = load_summary(cfg)?;
        let res = Resources::load(cfg)?;
        emit(cfg, &stats_products(cfg, &res, &summary, &cube), &cfg.out.join("stats"))
    })?
}

pub fn cmd_series(cfg: &RunConfig) -> Result<BundleManifest, PipelineError> {
    cfg.validate()?;
    with_jobs(cfg, || {
        let cube = load_cube(cfg)?;
        let res = Resources::load(cfg)?;
        emit(cfg, &series_products(cfg, &res, &cube)?, &cfg.out.join("series"))
    })?
}

pub fn cmd_correlate(cfg: &RunConfig) -> Result<BundleManifest, PipelineError> {
    cfg.validate()?;
    with_jobs(cfg, || {
        let cube = load_cube(cfg)?;
        let res = Resources::load(cfg)?;
        emit(cfg, &corr_products(cfg, &res, &cube), &cfg.out.join("correlate"))
    })?
}

/// Every product of one run, in memory.
pub fn all_products(cfg: &RunConfig) -> Result<Vec<ReportProduct>, PipelineError> {
    let res = Resources::load(cfg)?;
    let o = ingest(cfg, &res)?;
    let mut products = vec![
        ReportProduct::new(CORPUS_FILE, corpus_json(&o.summary)),
        ReportProduct::new(INGEST_FILE, json_bytes(&o.ingest_summary())),
        ReportProduct::new("rejects.ndjson", rejects_ndjson(&o.report.rejects)),
    ];
    products.extend(stats_products(cfg, &res, &o.summary, &o.cube));
    products.extend(series_products(cfg, &res, &o.cube)?);
    products.extend(corr_products(cfg, &res, &o.cube));
    Ok(products)
}

pub fn cmd_all(cfg: &RunConfig) -> Result<BundleManifest, PipelineError> {
    cfg.validate()?;
    with_jobs(cfg, || emit(cfg, &all_products(cfg)?, &cfg.out))?
}

/// The synth spec a config names, with its overrides applied.
pub fn synth_spec(cfg: &RunConfig) -> Result<SynthSpec, PipelineError> {
    let mut spec = match &cfg.synth_spec {
        Some(p) => SynthSpec::load(p)?,
        None => vshape_scenario(),
    };
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(n) = cfg.synth_messages {
        spec.messages = n;
    }
    spec.validate()?;
    Ok(spec)
}

/// Writes `corpus.ndjson.gz`, `synth_manifest.json`, `tickers.csv`,
/// `calendar.csv` and a `run.toml` that analyzes them.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthManifest, PipelineError> {
    let spec = synth_spec(cfg)?;
    let dir = &cfg.out;
    let corpus = dir.join(SYNTH_CORPUS);
    if corpus.exists() && !cfg.force {
        return Err(PipelineError::RefusesOverwrite(dir.display().to_string()));
    }
    let io = |p: &Path, e: std::io::Error| PipelineError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let manifest = with_jobs(cfg, || generate_to_path(&spec, &corpus))??;

    let write = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| io(&p, e))
    };
    write("synth_manifest.json", &json_bytes(&manifest))?;
    write("tickers.csv", &spec.catalog().to_csv())?;
    let mut cal = Vec::new();
    spec.calendar().write_csv(&mut cal).map_err(|e| io(dir, e))?;
    write("calendar.csv", &cal)?;
    let run = RunConfig {
        inputs: vec![SYNTH_CORPUS.into()],
        from: spec.start,
        to: spec.end,
        calendar: Some("calendar.csv".into()),
        catalog: Some("tickers.csv".into()),
        out: "bundle".into(),
        ..RunConfig::default()
    };
    write("run.toml", run.to_toml().as_bytes())?;
    log::info!("generated {} messages into {}", manifest.messages, corpus.display());
    Ok(manifest)
}
