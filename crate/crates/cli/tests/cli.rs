use std::path::Path;
use std::process::{Command, Output};

fn belief(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_belief"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn belief")
}

fn stderr_error(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("JSON error line");
    serde_json::from_str(line).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empty_input_yields_a_valid_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.ndjson");
    std::fs::write(&input, "").unwrap();
    let out = dir.path().join("bundle");
    let o = belief(&["all", "-i", s(&input), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["run_id"].as_str().unwrap().len(), 16);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"].as_array().unwrap().len() > 1);
}

#[test]
fn stages_need_their_upstream() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = belief(&["correlate", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_error(&o)["error"], "MissingUpstream");
}

#[test]
fn staged_run_and_overwrite_guard() {
    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("syn");
    let o = belief(&["synth", "-o", s(&syn), "--messages", "5000", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = syn.join("run.toml");
    let out = dir.path().join("staged");
    for stage in ["ingest", "stats", "series", "correlate"] {
        let o = belief(&[stage, "--config", s(&cfg), "-o", s(&out), "--jobs", "2"]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for sub in ["store", "stats", "series", "correlate"] {
        assert!(out.join(sub).join("manifest.json").is_file(), "{sub}");
    }
    assert!(out.join("series/sentiment_sma__all__all.csv").is_file());

    let o = belief(&["all", "--config", s(&cfg)]);
    assert!(o.status.success());
    let o = belief(&["all", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(stderr_error(&o)["error"], "RefusesOverwrite");
    let o = belief(&["all", "--config", s(&cfg), "--force"]);
    assert!(o.status.success());
}

#[test]
fn bad_config_is_a_config_error() {
    let o = belief(&["all", "-i", "x.ndjson", "--from", "2020-03-01", "--to", "2020-02-01"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["error"], "ConfigError");
}

#[test]
fn decompose_is_a_stub() {
    let o = belief(&["decompose"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr_error(&o)["message"].as_str().unwrap().contains("not implemented"));
    let help = belief(&["--help"]);
    assert!(String::from_utf8_lossy(&help.stdout).contains("decompose"));
}
