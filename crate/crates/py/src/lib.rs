//! Python bindings: `import belief`.

use std::path::PathBuf;

use belief_core::analytics::{self, CorrelationMatrix};
use belief_core::catalog::Category;
use belief_core::ingest::{self, RawMessage, SentimentLabel, Stopwords};
use belief_core::metrics::{self, BeliefSeries, Group1, Group2, GroupKey, SeriesKind, WindowMode};
use belief_core::pipeline;
use belief_core::report;
use belief_core::RunConfig;
use chrono::NaiveDate;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: pipeline::PipelineError) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e {
        pipeline::PipelineError::Io(_) => PyIOError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

/// One parsed message.
#[pyclass(frozen, get_all, module = "belief")]
struct Message {
    message_id: u64,
    user_id: u64,
    body: String,
    /// UTC, `YYYY-MM-DDTHH:MM:SSZ`.
    created_at: String,
    /// "Bullish", "Bearish" or None.
    sentiment: Option<&'static str>,
    cashtags: Vec<String>,
    approach: &'static str,
    holding_period: &'static str,
    experience: &'static str,
    followers: i64,
    following: i64,
}

impl From<RawMessage> for Message {
    fn from(m: RawMessage) -> Self {
        Message {
            message_id: m.message_id,
            user_id: m.user_id,
            created_at: m.created_at.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            sentiment: match m.sentiment {
                SentimentLabel::Bullish => Some("Bullish"),
                SentimentLabel::Bearish => Some("Bearish"),
                SentimentLabel::Unclassified => None,
            },
            cashtags: m.cashtags.iter().map(|t| t.to_string()).collect(),
            approach: m.profile.approach.label(),
            holding_period: m.profile.holding_period.label(),
            experience: m.profile.experience.label(),
            followers: m.followers,
            following: m.following,
            body: m.body,
        }
    }
}

#[pymethods]
impl Message {
    fn __repr__(&self) -> String {
        format!("Message(id={}, user={}, cashtags={:?})", self.message_id, self.user_id, self.cashtags)
    }
}

/// Parses one NDJSON line; raises ValueError on a malformed record.
#[pyfunction]
fn parse_message(line: &str) -> PyResult<Message> {
    ingest::parse_message(line, 1).map(Message::from).map_err(value_err)
}

#[pyfunction]
fn extract_cashtags(body: &str) -> Vec<String> {
    ingest::extract_cashtags(body).iter().map(|t| t.to_string()).collect()
}

/// Word, character, stopword and cashtag counts of a body.
#[pyfunction]
fn text_features<'py>(py: Python<'py>, body: &str) -> PyResult<Bound<'py, PyDict>> {
    let f = ingest::text_features(body, &Stopwords::english()).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("n_words", f.n_words)?;
    d.set_item("n_chars", f.n_chars)?;
    d.set_item("avg_word_len", f.avg_word_len)?;
    d.set_item("n_stopwords", f.n_stopwords)?;
    d.set_item("n_cashtags", f.n_cashtags)?;
    Ok(d)
}

#[pyfunction]
fn avg_sentiment(n_bullish: u64, n_bearish: u64) -> PyResult<f64> {
    metrics::avg_sentiment(n_bullish, n_bearish).map_err(value_err)
}

#[pyfunction]
fn disagreement(sentiment: f64) -> PyResult<f64> {
    metrics::disagreement(sentiment).map_err(value_err)
}

fn series(values: Vec<Option<f64>>) -> BeliefSeries {
    let days = (0..values.len() as i64).map(chrono_day).collect();
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

/// Positions mapped onto consecutive placeholder dates.
fn chrono_day(offset: i64) -> NaiveDate {
    NaiveDate::from_num_days_from_ce_opt(737_000 + offset as i32).unwrap()
}

/// Simple moving average over positions; None marks a missing day.
#[pyfunction]
#[pyo3(signature = (values, window = 7, min_obs = 1, trailing = false))]
fn sma(values: Vec<Option<f64>>, window: usize, min_obs: usize, trailing: bool) -> PyResult<Vec<Option<f64>>> {
    let mode = if trailing { WindowMode::Trailing } else { WindowMode::Lagged };
    metrics::sma(&series(values), window, min_obs, mode)
        .map(|s| s.values)
        .map_err(value_err)
}

/// Pearson over pairwise-complete positions, or None.
#[pyfunction]
#[pyo3(signature = (x, y, min_overlap = analytics::DEFAULT_MIN_OVERLAP))]
fn pearson(x: Vec<Option<f64>>, y: Vec<Option<f64>>, min_overlap: usize) -> PyResult<Option<f64>> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err("x and y must have the same length"));
    }
    Ok(analytics::pearson(&x, &y, min_overlap))
}

#[pyfunction]
fn summary_stats<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = analytics::summary_stats(&values).map_err(value_err)?;
    let d = PyDict::new(py);
    for (k, v) in [
        ("mean", s.mean),
        ("std", s.std),
        ("min", s.min),
        ("25%", s.p25),
        ("50%", s.p50),
        ("75%", s.p75),
        ("max", s.max),
    ] {
        d.set_item(k, v)?;
    }
    d.set_item("count", s.count)?;
    Ok(d)
}

/// Correlation matrix over named series.
#[pyfunction]
#[pyo3(signature = (labels, series, min_overlap = analytics::DEFAULT_MIN_OVERLAP))]
fn correlation_matrix(labels: Vec<String>, series: Vec<Vec<Option<f64>>>, min_overlap: usize) -> PyResult<Vec<Vec<Option<f64>>>> {
    if labels.len() != series.len() {
        return Err(PyValueError::new_err("one label per series"));
    }
    let m: CorrelationMatrix = analytics::correlation_matrix(labels, &series, chrono_day(0), false, min_overlap);
    Ok(m.entries)
}

/// Loads a lower-triangle matrix CSV into (labels, full matrix).
#[pyfunction]
fn load_matrix_csv(path: PathBuf) -> PyResult<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let bytes = std::fs::read(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
    report::load_matrix_csv(&bytes).map_err(value_err)
}

fn config(path: Option<PathBuf>, out: Option<PathBuf>, force: bool) -> PyResult<RunConfig> {
    let mut c = match path {
        Some(p) => RunConfig::load(&p).map_err(value_err)?,
        None => RunConfig::default(),
    };
    if let Some(o) = out {
        c.out = o;
    }
    c.force |= force;
    Ok(c)
}

/// Generates a synthetic corpus into `out`; returns the drawn totals.
#[pyfunction]
#[pyo3(signature = (out, messages = None, seed = None, spec = None, force = false))]
fn synth<'py>(
    py: Python<'py>,
    out: PathBuf,
    messages: Option<u64>,
    seed: Option<u64>,
    spec: Option<PathBuf>,
    force: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut c = config(None, Some(out), force)?;
    c.synth_messages = messages;
    c.seed = seed;
    c.synth_spec = spec;
    let m = py.detach(|| pipeline::cmd_synth(&c)).map_err(pipeline_err)?;
    let d = PyDict::new(py);
    d.set_item("messages", m.messages)?;
    d.set_item("users", m.users)?;
    d.set_item("classified", m.classified)?;
    d.set_item("bullish", m.bullish)?;
    d.set_item("seed", m.spec.seed)?;
    Ok(d)
}

/// Runs every stage for a config file (or `inputs` with defaults) and
/// writes the bundle; returns the run id and file names.
#[pyfunction]
#[pyo3(signature = (config_path = None, inputs = None, out = None, force = false))]
fn run_all<'py>(
    py: Python<'py>,
    config_path: Option<PathBuf>,
    inputs: Option<Vec<PathBuf>>,
    out: Option<PathBuf>,
    force: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut c = config(config_path, out, force)?;
    if let Some(i) = inputs {
        c.inputs = i;
    }
    let m = py.detach(|| pipeline::cmd_all(&c)).map_err(pipeline_err)?;
    let d = PyDict::new(py);
    d.set_item("run_id", m.run_id)?;
    d.set_item("files", m.files.into_iter().map(|f| f.name).collect::<Vec<_>>())?;
    d.set_item("out", c.out)?;
    Ok(d)
}

#[pymodule]
fn belief(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Message>()?;
    m.add_function(wrap_pyfunction!(parse_message, m)?)?;
    m.add_function(wrap_pyfunction!(extract_cashtags, m)?)?;
    m.add_function(wrap_pyfunction!(text_features, m)?)?;
    m.add_function(wrap_pyfunction!(avg_sentiment, m)?)?;
    m.add_function(wrap_pyfunction!(disagreement, m)?)?;
    m.add_function(wrap_pyfunction!(sma, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(summary_stats, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(load_matrix_csv, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(run_all, m)?)?;
    Ok(())
}
