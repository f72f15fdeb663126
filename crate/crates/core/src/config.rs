//! Run configuration: a TOML document whose keys the CLI flags mirror.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::analytics::{CorrDimension, EconomyState, DEFAULT_MIN_OVERLAP};
use crate::catalog::Sector;
use crate::ingest::DEFAULT_SHARD_LINES;
use crate::metrics::{Group1Dim, Group2Dim, SmoothingConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub group1: Group1Dim,
    pub group2: Group2Dim,
}

impl GroupSpec {
    pub fn new(group1: Group1Dim, group2: Group2Dim) -> Self {
        GroupSpec { group1, group2 }
    }

    pub fn slug(&self) -> String {
        format!("{}__{}", self.group1.slug(), self.group2.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// NDJSON corpus files, optionally `.gz`.
    pub inputs: Vec<PathBuf>,
    /// Inclusive trading-day range.
    pub from: NaiveDate,
    pub to: NaiveDate,
    /// Trading calendar file; US equity sessions when absent.
    pub calendar: Option<PathBuf>,
    /// Ticker catalog CSV; every ticker maps to the Unknown sector when absent.
    pub catalog: Option<PathBuf>,
    /// Stopword list; the built-in English list when absent.
    pub stopwords: Option<PathBuf>,
    pub smoothing: SmoothingConfig,
    pub states: Vec<EconomyState>,
    pub groups: Vec<GroupSpec>,
    pub corr_dims: Vec<CorrDimension>,
    pub min_overlap: usize,
    /// Sectors left out of sector-level aggregation.
    pub exclude_sectors: Vec<Sector>,
    pub top_cashtags: usize,
    pub top_industries: usize,
    pub out: PathBuf,
    /// Synth spec file; the V-shape scenario when absent.
    pub synth_spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    pub seed: Option<u64>,
    /// Overrides the spec's message count.
    pub synth_messages: Option<u64>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub shard_lines: usize,
    pub force: bool,
}

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

impl Default for RunConfig {
    fn default() -> Self {
        use Group1Dim as G1;
        use Group2Dim as G2;
        RunConfig {
            inputs: Vec::new(),
            from: d(2019, 11, 30),
            to: d(2020, 3, 31),
            calendar: None,
            catalog: None,
            stopwords: None,
            smoothing: SmoothingConfig::default(),
            states: EconomyState::defaults(),
            groups: vec![
                GroupSpec::new(G1::AllFirms, G2::AllInvestors),
                GroupSpec::new(G1::AllFirms, G2::Approach),
                GroupSpec::new(G1::AllFirms, G2::HoldingPeriod),
                GroupSpec::new(G1::AllFirms, G2::Experience),
                GroupSpec::new(G1::Sector, G2::AllInvestors),
            ],
            corr_dims: CorrDimension::ALL.to_vec(),
            min_overlap: DEFAULT_MIN_OVERLAP,
            exclude_sectors: vec![Sector::Conglomerates],
            top_cashtags: 20,
            top_industries: 10,
            out: PathBuf::from("out"),
            synth_spec: None,
            seed: None,
            synth_messages: None,
            jobs: 0,
            shard_lines: DEFAULT_SHARD_LINES,
            force: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            detail: e.to_string(),
        })
    }

    /// Loads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.inputs.iter_mut().for_each(fix);
        for p in [&mut cfg.calendar, &mut cfg.catalog, &mut cfg.stopwords, &mut cfg.synth_spec]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut cfg.out);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.to < self.from {
            return bad(format!("to ({}) is before from ({})", self.to, self.from));
        }
        let s = &self.smoothing;
        if s.window < 1 || s.min_obs < 1 || s.min_obs > s.window {
            return bad(format!("smoothing needs 1 <= min_obs <= window, got window={} min_obs={}", s.window, s.min_obs));
        }
        EconomyState::validate(&self.states).map_err(ConfigError::Invalid)?;
        if self.shard_lines == 0 {
            return bad("shard_lines must be positive".into());
        }
        Ok(())
    }

    /// The analysis-relevant part of the config, echoed into bundle
    /// manifests. Execution knobs (jobs, shard size, output location,
    /// force) are left out so they cannot change the bundle bytes.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().unwrap();
        for k in ["jobs", "shard_lines", "out", "force"] {
            obj.remove(k);
        }
        // Input and resource paths are recorded by file name only.
        let name = |p: &PathBuf| {
            serde_json::Value::String(p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
        };
        obj.insert("inputs".into(), self.inputs.iter().map(name).collect());
        for (k, p) in [
            ("calendar", &self.calendar),
            ("catalog", &self.catalog),
            ("stopwords", &self.stopwords),
            ("synth_spec", &self.synth_spec),
        ] {
            obj.insert(k.into(), p.as_ref().map_or(serde_json::Value::Null, name));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.from, d(2019, 11, 30));
        assert_eq!(c.to, d(2020, 3, 31));
        assert_eq!((c.smoothing.window, c.smoothing.min_obs), (7, 1));
        assert_eq!(c.min_overlap, 10);
        assert_eq!(c.states.len(), 3);
        c.validate().unwrap();
    }

    #[test]
    fn toml_partial_and_round_trip() {
        let c = RunConfig::from_toml("to = \"2020-02-28\"\n[smoothing]\nwindow = 5\n", "t").unwrap();
        assert_eq!(c.to, d(2020, 2, 28));
        assert_eq!(c.smoothing.window, 5);
        assert_eq!(c.smoothing.min_obs, 1);
        assert_eq!(RunConfig::from_toml(&c.to_toml(), "t").unwrap(), c);
        assert!(RunConfig::from_toml("bogus = 1", "t").is_err());
    }

    #[test]
    fn invalid() {
        let mut c = RunConfig::default();
        c.smoothing.min_obs = 9;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.states.reverse();
        assert!(c.validate().is_err());
    }

    #[test]
    fn snapshot_ignores_execution_knobs() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.jobs = 3;
        b.shard_lines = 7;
        b.out = "elsewhere".into();
        assert_eq!(a.snapshot(), b.snapshot());
    }
}
