use std::process::{Command, Output};

use serde_json::Value;

fn hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .env_remove("HECKE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

/// Header plus records from `--json` output.
fn records(args: &[&str]) -> (Value, Vec<Value>) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = hecke(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().map(|l| serde_json::from_str::<Value>(l).unwrap());
    let header = lines.next().expect("header line");
    (header, lines.collect())
}

#[test]
fn quotient_orders() {
    let (h, r) = records(&["quotient", "--mod", "8"]);
    assert_eq!(h["tool"], "hecke");
    assert!(h["version"].is_string());
    assert_eq!(r[0]["order"], 10240);
    assert_eq!(records(&["quotient", "--mod", "1"]).1[0]["order"], 1);
    assert_eq!(records(&["quotient", "--ideal", "2+L"]).1[0]["order"], 60);
    let r = records(&["quotient", "--mod", "2"]).1;
    let keys: Vec<&String> = r[0]["histogram"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["1", "2", "5"]);
}

#[test]
fn closure_orders() {
    let r = records(&["closure", "--mod", "8", "--seed", "T^4"]).1;
    assert_eq!(r[0]["order"], 32);
    let level4 = r[0]["kernels"]
        .as_array()
        .unwrap()
        .iter()
        .find(|k| k["level"] == "4")
        .unwrap();
    assert_eq!(level4["order"], 64);
    assert_eq!(level4["relation"], "inside kernel");
    assert_eq!(records(&["closure", "--mod", "2", "--seed", "T"]).1[0]["order"], 10);
    assert_eq!(records(&["closure", "--mod", "4", "--seed", "T^4"]).1[0]["order"], 1);
}

#[test]
fn verify_single_instances() {
    for args in [
        ["verify", "--lemma", "2.2", "--m", "3", "--p", "3"].as_slice(),
        &["verify", "--lemma", "3.5", "--m", "1"],
        &["verify", "--lemma", "D2", "--m", "2", "--p", "2"],
    ] {
        let r = records(args).1;
        assert_eq!(r.len(), 1);
        assert_eq!(r[0]["outcome"], "Pass", "{args:?}");
    }
    let r = records(&["verify", "--lemma", "2.2", "--m", "3", "--p", "3"]).1;
    assert!(r[0]["detail"].as_str().unwrap().contains("729"));
}

#[test]
fn congruence_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("level4.hfs");
    std::fs::write(&path, "[-inf; 1; 0; o; 1/L; o; L/L; o; L; 1; inf]\n").unwrap();
    let r = records(&["congruence", "--file", path.to_str().unwrap()]).1;
    assert_eq!(r[0]["verdict"], "NotCongruence");

    let r = records(&["congruence", "--hfs", "[-inf; 1; 0; 2; 1/L; o; L/L; 2; L; 1; inf]"]).1;
    assert_eq!(r[0]["verdict"], "Congruence");
    assert_eq!(r[0]["geometric_level"], 2);

    let r = records(&["congruence", "--gens", "S", "--gens", "T"]).1;
    assert_eq!((r[0]["index"].as_u64(), r[0]["geometric_level"].as_u64()), (Some(1), Some(1)));
    assert_eq!(r[0]["verdict"], "Congruence");

    let r = records(&["congruence", "--matrix", "[[0,-1],[1,0]]", "--matrix", "[[1,L],[0,1]]"]).1;
    assert_eq!(r[0]["index"], 1);
}

#[test]
fn census_rows() {
    assert_eq!(records(&["census", "--index", "1"]).1.len(), 1);
    assert!(records(&["census", "--index", "3"]).1.is_empty());
    let rows = records(&["census", "--index", "5"]).1;
    assert_eq!(rows.len(), 26);
    let unasserted: Vec<_> = rows.iter().filter(|r| r["asserted"] == false).collect();
    assert_eq!(unasserted.len(), 1);
    assert_eq!(unasserted[0]["normal"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(hecke(&["congruence", "--hfs", "[bad"]).status.code(), Some(1));
    assert_eq!(hecke(&["closure", "--mod", "4", "--seed", "Q"]).status.code(), Some(1));
    // Q(16) has 655360 elements
    let out = hecke(&["--cap", "1000", "quotient", "--mod", "16"]);
    assert_eq!(out.status.code(), Some(2));
    // a free-product subgroup of infinite index never closes
    let out = hecke(&["congruence", "--gens", "T", "--coset-cap", "500"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(hecke(&["verify", "--lemma", "nope"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic_across_cache_states() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--json", "--cache-dir", d, "quotient", "--mod", "6"];
    let cold = hecke(&args);
    let warm = hecke(&args);
    let none = hecke(&["--json", "--no-cache", "quotient", "--mod", "6"]);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.stdout, none.stdout);
}

#[test]
fn structured_report_round_trips() {
    use hecke::congruence::CongruenceReport;
    let out = hecke(&["--json", "congruence", "--hfs", "[-inf; *; 0; *; inf]"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().nth(1).unwrap();
    let mut v: Value = serde_json::from_str(line).unwrap();
    v.as_object_mut().unwrap().remove("record");
    let report: CongruenceReport = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), v);
}
