use std::path::Path;
use std::process::Command;

use projdiv::cli::output::{format_csv, parse_csv, to_json, ConstructionDoc, ErrorRecord};
use projdiv::assembly::Certificate;

fn projdiv(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_projdiv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn")
        .status
        .code()
        .expect("exit code")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn lemma1_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(projdiv(&["lemma1", "--r", "1", "--epsilon", "0.5"], dir.path()), 0);
    let doc: serde_json::Value = serde_json::from_str(&read(&dir.path().join("construction.json"))).unwrap();
    let errors = doc["achieved_errors"].as_array().unwrap();
    assert_eq!(errors.len(), 2);
    assert!(errors.iter().all(|e| e.as_f64().unwrap() < 0.5));
    assert!(doc["n"].as_array().unwrap().iter().all(|n| n.is_string()));
}

#[test]
fn eps_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(projdiv(&["certify", "--epsilon", "1.5"], dir.path()), 3);
    let rec: ErrorRecord = serde_json::from_str(&read(&dir.path().join("error.json"))).unwrap();
    assert_eq!(rec.kind, "eps out of range");
    assert_eq!(rec.exit_code, 3);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"epsilon": 1.5, "r": 1}"#).unwrap();
    let out = dir.path().join("out");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(projdiv(&["lemma1", "--config", cfg], &out), 3);
    assert_eq!(projdiv(&["lemma1", "--config", cfg, "--epsilon", "0.5"], &out), 0);
    assert!(!out.join("error.json").exists());
}

#[test]
fn malformed_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"blocks": 4}"#).unwrap();
    assert_eq!(projdiv(&["certify", "--config", cfg.to_str().unwrap()], dir.path()), 3);
    std::fs::write(&cfg, "{").unwrap();
    assert_eq!(projdiv(&["certify", "--config", cfg.to_str().unwrap()], dir.path()), 3);
}

#[test]
fn certify_outputs_round_trip_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(projdiv(&["certify"], &a), 0);
    assert_eq!(projdiv(&["certify"], &b), 0);
    for f in ["certificate.json", "trajectory.csv"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let cert_text = read(&a.join("certificate.json"));
    let cert: Certificate = serde_json::from_str(&cert_text).unwrap();
    assert!(cert.pass);
    assert!(cert.min_separation >= 0.0625);
    assert_eq!(to_json(&cert).unwrap(), cert_text);
    let csv = read(&a.join("trajectory.csv"));
    assert_eq!(format_csv(&parse_csv(&csv).unwrap()).unwrap(), csv);
    assert_eq!(parse_csv(&csv).unwrap().len(), 5);
}

#[test]
fn monomial_construction_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(projdiv(&["monomial", "--epsilon", "0.5"], dir.path()), 0);
    let text = read(&dir.path().join("construction.json"));
    let doc: ConstructionDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&doc).unwrap(), text);
}

#[test]
fn assemble_reports_shared_marker_overlap() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(projdiv(&["assemble", "--eps", "0.5,0.5"], dir.path()), 2);
    let rep: serde_json::Value = serde_json::from_str(&read(&dir.path().join("report.json"))).unwrap();
    let failing: Vec<&str> = rep["reports"][0]["clauses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["pass"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.iter().all(|n| n.starts_with("cross[")), "{failing:?}");
}

#[test]
fn expand_word_respects_cap() {
    let dir = tempfile::tempdir().unwrap();
    let word = dir.path().join("w.json");
    std::fs::write(
        &word,
        r#"{"kind":"power","base":{"kind":"concat","children":[{"kind":"letter","symbol":"P"},{"kind":"letter","symbol":"Q"}]},"exp":"3"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(projdiv(&["expand-word", "--word", word.to_str().unwrap()], &out), 0);
    let rep: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert_eq!(rep["expansion"], "PQPQPQ");
    assert_eq!(rep["length"], "6");
    assert_eq!(projdiv(&["expand-word", "--word", word.to_str().unwrap(), "--literal-cap", "5"], &out), 1);
}
