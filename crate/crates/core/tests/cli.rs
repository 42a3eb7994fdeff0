use std::path::{Path, PathBuf};
use std::process::Command;

use isocap::cli::json::{fmt_float, parse_float, reports_from_json, reports_to_json};
use isocap::cli::{read_csv, run_config, CommandKind, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_isocap");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn isocap(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn shipped_configs_run() {
    for (cmd, file) in [
        ("catalog", "catalog.json"),
        ("analyze", "analyze_nikodym.json"),
        ("bound", "bound_interval_cos.json"),
        ("verify", "verify_interval_cos.json"),
        ("sweep", "sweep_nikodym.json"),
    ] {
        let path = configs().join(file);
        let out = isocap(&[cmd, "--config", path.to_str().unwrap(), "--format", "csv"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn reports_round_trip_byte_for_byte() {
    let text = std::fs::read_to_string(configs().join("analyze_nikodym.json")).unwrap();
    let c = RunConfig::parse(&text, None).unwrap();
    let out = run_config(CommandKind::Analyze, &c, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write_artifacts(dir.path()).unwrap();
    let written = std::fs::read_to_string(dir.path().join("analyze.json")).unwrap();
    let reports = reports_from_json(&written).unwrap();
    assert_eq!(reports.len(), 5);
    assert_eq!(reports_to_json(&reports), written);
    assert!(dir.path().join("analyze.csv").exists());
}

#[test]
fn sweep_csv_rereads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let path = configs().join("sweep_nikodym.json");
    let out = isocap(&["sweep", "--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let table = read_csv(&text).unwrap();
    assert_eq!(table.header[..3], ["alpha", "p", "q"]);
    assert_eq!(table.rows.len(), 20 * 3 * 4);
    for row in &table.rows {
        for cell in &row[..3] {
            let x = parse_float(cell).unwrap();
            assert_eq!(&fmt_float(x), cell);
        }
        if !row[5].is_empty() {
            assert_eq!(fmt_float(parse_float(&row[5]).unwrap()), row[5]);
        }
    }
    assert_eq!(table.to_csv().unwrap(), text);
    let boundary = read_csv(&std::fs::read_to_string(out_dir.join("boundary.csv")).unwrap()).unwrap();
    // One decision boundary per (p, q) cell whose threshold alpha = 1 + p/q'
    // falls inside the swept range; p = 3 with q = 4 or inf lies beyond 3.
    assert_eq!(boundary.rows.len(), 10);
    for row in &boundary.rows {
        let (p, q) = (parse_float(&row[0]).unwrap(), parse_float(&row[1]).unwrap());
        let q_conj = if q.is_infinite() { 1.0 } else { q / (q - 1.0) };
        let mid = parse_float(&row[4]).unwrap();
        assert!((mid - (1.0 + p / q_conj)).abs() <= 0.1, "p = {p} q = {q}: boundary {mid}");
    }
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let path = configs().join("sweep_nikodym.json");
    let path = path.to_str().unwrap();
    let runs: Vec<Vec<u8>> = ["1", "4", "4"]
        .iter()
        .map(|t| isocap(&["sweep", "--config", path, "--format", "json", "--threads", t]).stdout)
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    let bound = configs().join("bound_interval_cos.json");
    let a = isocap(&["bound", "--config", bound.to_str().unwrap(), "--format", "csv"]).stdout;
    let b = isocap(&["bound", "--config", bound.to_str().unwrap(), "--format", "csv"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn verify_succeeds_on_the_interval() {
    let path = configs().join("verify_interval_cos.json");
    let out = isocap(&["verify", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc.to_string().contains("SOLUTION_BOUND"));
}

#[test]
fn errors_exit_one_and_name_the_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "analyze",
            r#"{"domain": {"family": "couhil_comb", "delta": {"kind": "power", "exponent": 2.0}}, "p": 2.5, "q": 2}"#,
            "1 <= p <= 2",
        ),
        (
            "analyze",
            r#"{"domain": {"family": "lipschitz_ball", "n": 2}, "p": 2.0, "q": 0.5}"#,
            "1 <= q <= inf",
        ),
        ("analyze", r#"{"domain": {"family": "lipschitz_ball", "n": 2}, "p": 2.0}"#, "q"),
        ("verify", r#"{"command": "bound"}"#, "\"bound\""),
        (
            "analyze",
            r#"{"domain": {"family": "lipschitz_ball", "n": 2}, "p": 2.0, "q": 2, "criteria": ["XYZ"]}"#,
            "unknown criterion family",
        ),
        ("analyze", r#"{"domain": 1, "typo": true}"#, "invalid config"),
    ];
    for (i, (cmd, text, needle)) in cases.iter().enumerate() {
        let path = write_config(dir.path(), &format!("c{i}.json"), text);
        let out = isocap(&[cmd, "--config", &path]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(1), "{text}: {err}");
        assert!(err.contains(needle), "{text}: {err}");
    }
    let out = isocap(&["analyze", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}
