use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use idnc_cli::{parse_config, Document, SWEEP_HEADER};

fn idnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idnc")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SWEEP: &str = r#"{
  "variable": "N",
  "values": [2, 4],
  "base": {"M": 8, "C": 0.4, "Q": 0.2, "trials": 5, "seed": 2},
  "policies": ["PMP", "PC_D2D_OPTIMAL"]
}"#;

#[test]
fn sweep_writes_table_sidecar_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "points.json", SWEEP);
    let out = dir.path().join("nested/out");
    let output = idnc(&["sweep", &config, "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let csv = fs::read_to_string(out.join("points.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER.join(","));
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("N,2,PMP,"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",5,0")));

    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("points.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["base"]["P"], 0.1);
    assert_eq!(sidecar["rows"].as_array().unwrap().len(), 4);
    assert_eq!(sidecar["rows"][3]["config"]["N"], 4);

    let svg = fs::read_to_string(out.join("points.svg")).unwrap();
    assert!(svg.contains("number of packets N"));
    assert!(svg.contains("PMP") && svg.contains("PC_D2D_OPTIMAL"));
}

#[test]
fn policy_and_seed_flags_override_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "points.json", SWEEP);
    let out = dir.path().join("out");
    let output = idnc(&[
        "sweep", &config, "--out", out.to_str().unwrap(), "--policy", "fc_d2d", "--seed", "9", "--record-timing",
    ]);
    assert!(output.status.success());
    let csv = fs::read_to_string(out.join("points.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.contains(",FC_D2D,")));
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("points.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["base"]["seed"], 9);
}

#[test]
fn run_writes_one_record_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "one.json",
        r#"{"M": 6, "N": 3, "C": 0.5, "Q": 0.2, "trials": 7, "seed": 1, "policy": "PC_D2D_HEURISTIC"}"#,
    );
    let out = dir.path().join("out");
    let output = idnc(&["run", &config, "--out", out.to_str().unwrap(), "--strict-definition1"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(out.join("one.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,total_delay,mean_delay,rounds,completed"));
    assert_eq!(csv.lines().count(), 8);
    let record: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("one.json")).unwrap()).unwrap();
    assert_eq!(record["config"]["strict_definition1"], true);
    assert_eq!(record["trials"].as_array().unwrap().len(), 7);
}

#[test]
fn invalid_documents_report_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bad.json",
        r#"{"M": 6, "N": 3, "C": 0, "Q": 0.2, "trials": 1, "seed": 1, "policy": "PMP"}"#,
    );
    let output = idnc(&["run", &config]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("C: must lie in (0, 1]"), "{stderr}");

    let output = idnc(&["sweep", &write(dir.path(), "missing.json", "")]);
    assert!(!output.status.success());
    let output = idnc(&["run", dir.path().join("absent.json").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&output.stderr).contains("absent.json"));
}

#[test]
fn documents_of_the_wrong_kind_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "points.json", SWEEP);
    let output = idnc(&["run", &config]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("idnc sweep"));
}

#[test]
fn failed_sweep_keeps_finished_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "sparse.json",
        r#"{"variable": "M", "values": [6, 9],
            "base": {"N": 2, "C": 0.5, "Q": 0.2, "trials": 1, "seed": 0}, "policies": ["ORACLE"]}"#,
    );
    let out = dir.path().join("out");
    let output = idnc(&["sweep", &config, "--out", out.to_str().unwrap()]);
    assert!(!output.status.success());
    let csv = fs::read_to_string(out.join("sparse.partial.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn verify_prints_one_line_per_check() {
    let output = idnc(&["verify", "--seed", "5"]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(stdout.lines().count(), 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn bundled_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let doc = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if let Document::Sweep(spec) = doc {
                assert!(!spec.policies.is_empty());
            }
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
