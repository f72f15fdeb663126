use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use belief_core::analytics::{decompose_stub, EconomyState};
use belief_core::metrics::{BeliefSeries, Group1, Group2, GroupKey, SeriesKind};
use belief_core::pipeline::{self, PipelineError};
use belief_core::RunConfig;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "belief", version, about = "Sentiment and disagreement measurement over labeled investor messages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the inputs into an aggregate store under <out>/store
    Ingest(Opts),
    /// Descriptive, profile and frequency tables from the store
    Stats(Opts),
    /// Daily and moving-average sentiment/disagreement series from the store
    Series(Opts),
    /// Disagreement correlation matrices per economy state from the store
    Correlate(Opts),
    /// Generate a synthetic corpus with its ground-truth manifest
    Synth(Opts),
    /// Run every stage and write one bundle into <out>
    All(Opts),
    /// Trend/seasonal decomposition of a belief series (reserved stub; always fails with NotImplemented)
    Decompose,
}

/// Every flag overrides the matching key of the config file.
#[derive(Args, Default)]
struct Opts {
    /// TOML run config; flags win over its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// NDJSON input file, optionally .gz (repeatable)
    #[arg(long = "input", short = 'i')]
    inputs: Vec<PathBuf>,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// First trading day, YYYY-MM-DD
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Last trading day, YYYY-MM-DD
    #[arg(long)]
    to: Option<NaiveDate>,
    /// Moving-average window in trading days
    #[arg(long)]
    window: Option<usize>,
    /// Minimum non-missing days inside a window
    #[arg(long)]
    min_obs: Option<usize>,
    /// Economy states as Name=YYYY-MM-DD, comma separated
    #[arg(long, value_delimiter = ',')]
    states: Option<Vec<EconomyState>>,
    /// Worker threads (0: one per core)
    #[arg(long)]
    jobs: Option<usize>,
    /// Synth seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overwrite an existing bundle
    #[arg(long)]
    force: bool,
    /// Ticker catalog CSV (symbol,sector,industry)
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Trading calendar CSV (date,close)
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// Stopword list, one word per line
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Synth spec TOML (default: the V-shape scenario)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Synth message count
    #[arg(long)]
    messages: Option<u64>,
    /// Lines per parse shard
    #[arg(long)]
    shard_lines: Option<usize>,
}

impl Opts {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            c.inputs = self.inputs;
        }
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set!(
            out => c.out,
            from => c.from,
            to => c.to,
            window => c.smoothing.window,
            min_obs => c.smoothing.min_obs,
            states => c.states,
            jobs => c.jobs,
            shard_lines => c.shard_lines,
        );
        c.seed = self.seed.or(c.seed);
        c.synth_messages = self.messages.or(c.synth_messages);
        c.catalog = self.catalog.or(c.catalog);
        c.calendar = self.calendar.or(c.calendar);
        c.stopwords = self.stopwords.or(c.stopwords);
        c.synth_spec = self.spec.or(c.synth_spec);
        c.force |= self.force;
        Ok(c)
    }
}

fn run(cmd: Command) -> Result<serde_json::Value, PipelineError> {
    let resolve = |o: Opts| {
        o.resolve()
            .map_err(|e| PipelineError::Config(belief_core::config::ConfigError::Invalid(format!("{e:#}"))))
    };
    let bundle = |m: belief_core::report::BundleManifest, out: PathBuf| {
        json!({"out": out, "run_id": m.run_id, "files": m.files.len()})
    };
    Ok(match cmd {
        Command::Ingest(o) => {
            let c = resolve(o)?;
            bundle(pipeline::cmd_ingest(&c)?, c.out.join(pipeline::STORE_DIR))
        }
        Command::Stats(o) => {
            let c = resolve(o)?;
            bundle(pipeline::cmd_stats(&c)?, c.out.join("stats"))
        }
        Command::Series(o) => {
            let c = resolve(o)?;
            bundle(pipeline::cmd_series(&c)?, c.out.join("series"))
        }
        Command::Correlate(o) => {
            let c = resolve(o)?;
            bundle(pipeline::cmd_correlate(&c)?, c.out.join("correlate"))
        }
        Command::All(o) => {
            let c = resolve(o)?;
            bundle(pipeline::cmd_all(&c)?, c.out.clone())
        }
        Command::Synth(o) => {
            let c = resolve(o)?;
            let m = pipeline::cmd_synth(&c)?;
            json!({"out": c.out, "messages": m.messages, "users": m.users, "seed": m.spec.seed})
        }
        Command::Decompose => {
            let empty = BeliefSeries::new(
                GroupKey {
                    group1: Group1::AllFirms,
                    group2: Group2::AllInvestors,
                },
                SeriesKind::Sentiment,
                Vec::new(),
                Vec::new(),
            );
            let err = decompose_stub(&empty).unwrap_err();
            return Err(PipelineError::Input {
                what: "decompose".into(),
                detail: err.to_string(),
            });
        }
    })
}

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) => 2,
        PipelineError::MissingUpstream { .. } => 3,
        PipelineError::Io(_) => 4,
        PipelineError::Input { .. } => 5,
        PipelineError::RefusesOverwrite(_) => 6,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(exit_code(&e))
        }
    }
}
