use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cogsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogsig")).args(args).output().expect("run cogsig")
}

fn ok(args: &[&str]) -> String {
    let out = cogsig(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_is_deterministic_and_writes_labels() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    ok(&["synth", "--kind", "composition", "--words", "300", "--seed", "7", "--session", "s", "--out", p(&a)]);
    ok(&["synth", "--kind", "composition", "--words", "300", "--seed", "7", "--session", "s", "--out", p(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let labels: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.labels.json")).unwrap()).unwrap();
    assert!(labels["planning_events"].is_array());
}

#[test]
fn analyze_verify_and_check_commitment() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("c.jsonl");
    let report = dir.path().join("c.json");
    ok(&["synth", "--kind", "composition", "--seed", "3", "--out", p(&log)]);
    let normalized = ok(&["ingest", p(&log)]);
    assert_eq!(normalized, std::fs::read_to_string(&log).unwrap());

    ok(&["analyze", p(&log), "--out", p(&report)]);
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["verdict"], "composition");
    assert_eq!(parsed["schema"], "cogsig-report-v1");

    let salt = "00112233445566778899aabbccddeeff";
    let digest = ok(&["verify", p(&report), "--salt-hex", salt, "--created-at", "2024-05-01"]);
    let digest = digest.trim();
    assert_eq!(digest.len(), 64);
    let evr = dir.path().join("c.evr.json");
    let record = std::fs::read_to_string(&evr).unwrap();
    assert!(!record.contains(' ') && !record.contains('\n'));
    let checked = ok(&["verify", p(&evr), "--commitment", digest]);
    assert!(checked.contains("\"verified\":true"));

    std::fs::write(&evr, record.replacen("\"word_count\":1500", "\"word_count\":1501", 1)).unwrap();
    let out = cogsig(&["verify", p(&evr), "--commitment", digest]);
    assert!(!out.status.success());
}

#[test]
fn enroll_norms_and_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    for seed in 0..5 {
        let log = dir.path().join(format!("s{seed}.jsonl"));
        let report = dir.path().join(format!("s{seed}.json"));
        ok(&["synth", "--kind", "composition", "--words", "400", "--seed", &seed.to_string(), "--writer", "w9", "--out", p(&log)]);
        ok(&["analyze", p(&log), "--out", p(&report)]);
        ok(&["verify", p(&report), "--salt-hex", &format!("{seed:032x}")]);
        records.push(dir.path().join(format!("s{seed}.evr.json")));
    }
    let baseline = dir.path().join("baseline.json");
    let norms = dir.path().join("norms.json");
    let recs: Vec<&str> = records.iter().map(|r| p(r)).collect();
    let mut enroll = vec!["enroll"];
    enroll.extend(&recs[..3]);
    enroll.extend(["--out", p(&baseline)]);
    ok(&enroll);
    ok(&["norms", "--writers", "20", "--max-sessions", "3", "--words", "400", "--out", p(&norms)]);

    let mut check = vec!["consistency"];
    check.extend(&recs[3..]);
    check.extend(["--baseline", p(&baseline), "--norms", p(&norms)]);
    let result: Value = serde_json::from_str(&ok(&check)).unwrap();
    assert!(result["outcome"] == "pass" || result["outcome"] == "flag");
    assert_eq!(result["sessions"], 2);

    // norms were calibrated up to 3 sessions only
    let mut too_many = vec!["consistency"];
    too_many.extend(&recs);
    too_many.extend(["--baseline", p(&baseline), "--norms", p(&norms)]);
    assert!(!cogsig(&too_many).status.success());
}

#[test]
fn sweep_writes_csv() {
    let csv = ok(&["sweep", "--r", "1,5,50", "--sessions", "4", "--seed", "1", "--words", "300"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r_ms,accuracy,pooled_entropy_bits,mi_proxy_bits");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"t\":5,\"kind\":\"insert\",\"payload\":\"a\",\"pos\":0}\n{\"t\":3,\"kind\":\"insert\",\"payload\":\"b\",\"pos\":1}\n").unwrap();
    let out = cogsig(&["ingest", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "NonMonotonicTimestamp");

    let out = cogsig(&["sweep", "--r", "5,1", "--sessions", "2", "--words", "100"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InvalidResolutionList");
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let out = cogsig(&["teleport"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}
