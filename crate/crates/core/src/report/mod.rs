//! Deterministic serialization of analytics products into a hashed bundle.
//!
//! CSV dialect: comma delimiter, LF line endings, RFC 4180 quoting, dot
//! decimal, empty field for a missing value.

mod tables;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use tables::{
    corpus_json, daily_table_csv, hist_hour_csv, hist_weekday_csv, load_daily_csv, load_matrix_csv, matrix_csv,
    matrix_json, profile_table_csv, rejects_ndjson, series_table_csv, stats_table_csv, top_k_csv, DailyRow,
    STATS_COLUMNS,
};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0} already holds a bundle; pass --force to overwrite")]
    RefusesOverwrite(String),
    #[error("malformed {what}: {detail}")]
    Load { what: String, detail: String },
}

/// Six significant digits, `%g` style: fixed notation for exponents -4..=5,
/// scientific otherwise, trailing zeros dropped.
pub fn fmt_g6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_full(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportProduct {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl ReportProduct {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        ReportProduct {
            name: name.into(),
            bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format_version: u32,
    /// Hash of the config snapshot and every file hash.
    pub run_id: String,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

impl BundleManifest {
    pub fn load(dir: &Path) -> Result<Self, ReportError> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ReportError::Load {
            what: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every product plus `manifest.json` into `out_dir`.
pub fn emit_bundle(
    products: &[ReportProduct],
    config: &serde_json::Value,
    out_dir: &Path,
    force: bool,
) -> Result<BundleManifest, ReportError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| ReportError::Io { path, source }
    };
    let manifest_path = out_dir.join(MANIFEST_NAME);
    if manifest_path.exists() && !force {
        return Err(ReportError::RefusesOverwrite(out_dir.display().to_string()));
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    if force {
        // Drop files of the previous bundle that this run does not produce.
        if let Ok(old) = BundleManifest::load(out_dir) {
            for f in old.files.iter().filter(|f| products.iter().all(|p| p.name != f.name)) {
                let _ = fs::remove_file(out_dir.join(&f.name));
            }
        }
    }
    let mut files: Vec<FileEntry> = products
        .par_iter()
        .map(|p| {
            let path: PathBuf = out_dir.join(&p.name);
            fs::write(&path, &p.bytes).map_err(io_err(&path))?;
            Ok(FileEntry {
                name: p.name.clone(),
                sha256: sha256_hex(&p.bytes),
                bytes: p.bytes.len() as u64,
            })
        })
        .collect::<Result<_, ReportError>>()?;
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    for f in &files {
        h.update(f.name.as_bytes());
        h.update(f.sha256.as_bytes());
    }
    let manifest = BundleManifest {
        format_version: FORMAT_VERSION,
        run_id: hex::encode(&h.finalize()[..8]),
        config: config.clone(),
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}
