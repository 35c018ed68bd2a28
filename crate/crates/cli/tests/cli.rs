use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netequiv"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV with a `#` header block, split on commas.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn validate_accepts_samples_and_rejects_malformed() {
    for f in ["relay.json", "single_link.json", "two_pair.json"] {
        let o = run(&["validate", data(f).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{f}");
        assert!(stdout(&o).starts_with("ok:"));
    }
    let o = run(&["validate", data("malformed.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse") && err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_and_bad_arguments_are_input_errors() {
    assert_eq!(run(&["bounds", "/nonexistent/net.json"]).status.code(), Some(2));
    let relay = data("relay.json");
    let f = relay.to_str().unwrap();
    assert_eq!(run(&["bounds", f, "--alpha-grid", "0:2:1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", f, "--beta-step", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", f, "--alpha-grid", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(run(&["repro", "layered", "--n", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["repro", "multicast", "--delta-ratio-db", "3", "--p-db", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn invalid_network_content_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"nodes": ["A"], "links": [{"from": "A", "to": "B", "kind": "awgn", "snr": 1}], "demands": []}"#,
    )
    .unwrap();
    let o = run(&["bounds", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_single_link_is_tight() {
    let o = run(&["bounds", data("single_link.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, body) = rows(&stdout(&o));
    assert_eq!(body.len(), 1);
    let inner: f64 = body[0][col(&h, "inner")].parse().unwrap();
    let outer: f64 = body[0][col(&h, "outer")].parse().unwrap();
    assert!((inner - 1.0).abs() < 1e-12 && (outer - 1.0).abs() < 1e-12);
}

#[test]
fn bounds_relay_sandwich_and_report_to_stdout_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = run(&["bounds", data("relay.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = stdout(&o);
    assert!(report.contains("inner") && report.contains("gap"), "{report}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# netequiv "));
    assert!(csv.contains("# invocation: netequiv bounds"));
    let (h, body) = rows(&csv);
    for r in &body {
        let inner: f64 = r[col(&h, "inner")].parse().unwrap();
        let outer: f64 = r[col(&h, "outer")].parse().unwrap();
        assert!(inner <= outer + 1e-9);
        assert_eq!(r[col(&h, "alpha_grid")], "0:1:0.1");
    }
}

#[test]
fn bounds_output_is_deterministic() {
    let f = data("two_pair.json");
    let a = run(&["bounds", f.to_str().unwrap()]);
    let b = run(&["bounds", f.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let (_, body) = rows(&stdout(&a));
    assert_eq!(body.len(), 4);
}

#[test]
fn decouple_lists_components() {
    let o = run(&["decouple", data("two_pair.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("mac [S1,S2] -> [R]"));
    assert!(s.contains("bc [R] -> [D1,D2]"));
    assert!(s.contains("bsc capacity"));
}

#[test]
fn repro_relay_columns_and_relay_off_region() {
    let o = run(&["repro", "relay", "--gamma-sr-db", "-10:0:5"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, body) = rows(&stdout(&o));
    for name in [
        "gamma_sd_db",
        "gamma_rd_db",
        "gamma_sr_db",
        "eq_upper",
        "eq_lower",
        "cutset",
        "df",
        "cf",
    ] {
        col(&h, name);
    }
    assert_eq!(body.len(), 3);
    for r in &body {
        assert_eq!(r[col(&h, "eq_lower")], "0.5");
    }
}

#[test]
fn repro_layered_checks_closed_forms() {
    let o = run(&["repro", "layered", "--n", "3", "--gamma-db", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, body) = rows(&stdout(&o));
    assert_eq!(body.len(), 11);
    assert!(body.iter().all(|r| r[col(&h, "check")] == "ok"));
    assert_eq!(body[0][col(&h, "regime")], "R/n");
}

#[test]
fn repro_multicast_reports_c12_note() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = run(&["repro", "multicast", "--p-db", "-5:25:15", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("2.2503") && csv.contains("2.85"));
    let (h, body) = rows(&csv);
    assert_eq!(body.len(), 3);
    for r in &body {
        let up: f64 = r[col(&h, "eq_upper_sum")].parse().unwrap();
        let low: f64 = r[col(&h, "eq_lower_sum")].parse().unwrap();
        assert!(low <= up + 1e-9);
        assert_eq!(r[col(&h, "c12_discrepancy")], "true");
    }
}

#[test]
fn repro_is_byte_identical_across_runs() {
    let args = ["repro", "relay", "--gamma-sr-db", "0:30:10"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
