use std::process::{Command, Output};

use serde_json::Value;

fn rsosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsosc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn level_n_verifier_passes_at_k10() {
    let out = rsosc(&["verify-t21", "--k", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "rudin-shapiro-report/1");
    assert_eq!(v["pass"], true);
    assert!(v["report"]["zero_count"].as_u64().unwrap() >= 257);
    assert!(v["report"]["interval_hits"].as_u64().unwrap() >= 514);
}

#[test]
fn eta_out_of_range_is_a_usage_error() {
    let out = rsosc(&["verify-t22", "--k", "4", "--eta", "0.6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_k_is_a_usage_error() {
    assert_eq!(rsosc(&["moments"]).status.code(), Some(2));
    assert_eq!(rsosc(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn second_moment_at_k6() {
    let out = rsosc(&["moments", "--k", "6", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let m = &json(&out)["report"]["moments"][0];
    assert_eq!(m["exact"], true);
    assert!((m["estimate"].as_f64().unwrap() - 8.0).abs() < 1e-12);
}

#[test]
fn oversized_request_is_a_resource_error() {
    let out = rsosc(&["build", "--k", "20", "--max-len", "1024"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify-t22", "--k", "8", "--eta=-0.25", "--threads", "2"];
    let a = rsosc(&args);
    let b = rsosc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = rsosc(&["verify-t22", "--k", "8", "--eta=-0.25", "--threads", "1"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn crossings_csv_has_preamble_and_header() {
    let out = rsosc(&["crossings", "--k", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# schema: rudin-shapiro-report/1"));
    assert_eq!(lines.next().unwrap(), "index,cell,angle,residual,kind");
    assert!(lines.count() >= 5);
}

#[test]
fn binary_eval_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p6.bin");
    let out = rsosc(&[
        "eval",
        "--k",
        "6",
        "--format",
        "bin",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 64 * 16 * 16);
    let sidecar: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("p6.bin.json")).unwrap()).unwrap();
    assert_eq!(sidecar["count"], 1024);
    assert_eq!(sidecar["encoding"], "complex-f64-le");
}

#[test]
fn binary_needs_an_output_path() {
    assert_eq!(
        rsosc(&["eval", "--k", "4", "--format", "bin"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn build_text_roundtrips() {
    let out = rsosc(&["build", "--k", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("+1"));
}

#[test]
fn every_verifier_passes_at_small_k() {
    for cmd in [
        "eval",
        "lemma31",
        "antisym",
        "signarg",
        "dist1d",
        "dist2d",
        "moments",
        "mahler",
        "verify-t22",
    ] {
        let out = rsosc(&[cmd, "--k", "6"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
