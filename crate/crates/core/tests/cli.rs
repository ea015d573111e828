mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use securesum::audit::{audit_scheme, AuditReport};
use securesum::harness::{read_json, AuditFile, SchemeFile, Transcript};
use securesum::schemes::{symmetric_keygen, SymmetricRequest};
use securesum::RandomStream;

fn securesum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_securesum")).args(args).env_remove("SECURE_SUM_SEED").output().unwrap()
}

fn with_env_seed(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_securesum")).args(args).env("SECURE_SUM_SEED", seed).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn capacity_command() {
    let o = securesum(&["capacity", "--K", "3", "--T", "0", "--G", "2"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "R ≥ 1, R_S ≥ 2/3\n"));
    let o = securesum(&["capacity", "--K", "4", "--T", "2", "--G", "3"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (2, "INFEASIBLE\n"));
    let o = securesum(&["capacity", "--K", "2", "--T", "0"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "R ≥ 1, R_Z ≥ 1, R_ZΣ ≥ 1\n"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&securesum(&["capacity", "--K", "3"])), 1);
    assert_eq!(code(&securesum(&["capacity", "--K", "3", "--T", "2"])), 1);
    assert_eq!(code(&securesum(&["frobnicate"])), 1);
    assert_eq!(code(&securesum(&["--help"])), 0);
}

#[test]
fn feasibility_command_on_three_edge_graph() {
    let o = securesum(&["feasibility", path(&fixture("three_edge_t4.json"))]);
    assert_eq!((code(&o), stdout(&o).as_str()), (2, "INFEASIBLE: T={4}, partition {1} | {2,3}\n"));
    let o = securesum(&["feasibility", path(&fixture("three_edge_t3.json"))]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "FEASIBLE\n"));
    let o = securesum(&["feasibility", path(&fixture("three_edge_connected.json"))]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "FEASIBLE\n"));
}

#[test]
fn invalid_files_exit_five() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"K": 4, "edges": [[1,5]]}"#).unwrap();
    assert_eq!(code(&securesum(&["feasibility", path(&bad)])), 5);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&securesum(&["audit", "--scheme", path(&bad)])), 5);
    assert_eq!(code(&securesum(&["feasibility", path(&dir.path().join("missing.json"))])), 5);
    std::fs::write(&bad, r#"{"schema":2,"scheme":{"type":"coded","K":3},"q":5}"#).unwrap();
    assert_eq!(code(&securesum(&["keygen", "--config", path(&bad)])), 5);
}

#[test]
fn keygen_run_audit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("scheme.json");
    let o = securesum(&["keygen", "--config", path(&fixture("k3_t0_g2_q251.json")), "--out", path(&scheme)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("certificate T={}: rank 6/6 PASS"));

    let transcript = dir.path().join("t.json");
    let o = securesum(&[
        "run", "--scheme", path(&scheme), "--inputs", path(&fixture("inputs_k3.json")), "--seed", "3", "--out", path(&transcript),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("decoded sum: 6 0 0"));
    let t: Transcript = read_json(&transcript).unwrap();
    assert_eq!(t.inputs, vec![vec![1, 0, 0], vec![2, 0, 0], vec![3, 0, 0]]);
    assert_eq!(t.decoded_sum, vec![6, 0, 0]);
    assert!(t.keys.is_some() && t.summary.decoded_matches && t.summary.scheme_certified);

    let report = dir.path().join("audit.json");
    let o = securesum(&["audit", "--scheme", path(&scheme), "--out", path(&report)]);
    assert_eq!(code(&o), 0);
    let table = stdout(&o);
    assert!(table.lines().any(|l| l.starts_with("{}") && l.ends_with("PASS")), "{table}");
    assert!(table.contains("R_S = 2/3 (bound 2/3, optimal)"));

    // the audit read back from disk equals the in-memory audit of the same draw
    let file: AuditFile = read_json(&report).unwrap();
    let in_memory =
        symmetric_keygen(SymmetricRequest::new(3, 0, 2), field(251), &RandomStream::new(7)).unwrap();
    let loaded: SchemeFile = read_json(&scheme).unwrap();
    assert_eq!(loaded.scheme, in_memory);
    let expect: AuditReport = audit_scheme(&in_memory, &in_memory.params().default_family(), None).unwrap();
    assert_eq!(file.report, expect);
}

#[test]
fn audit_with_mi_on_small_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("coded.json");
    assert_eq!(code(&securesum(&["keygen", "--config", path(&fixture("coded_k3_q3.json")), "--out", path(&scheme)])), 0);
    let o = securesum(&["audit", "--scheme", path(&scheme), "--mi"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let rows: Vec<String> = stdout(&o).lines().skip(1).take(4).map(str::to_string).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(" 0 ") && r.ends_with("PASS")), "{rows:?}");
    assert!(stdout(&o).contains("R_ZΣ = 2 (bound 2, optimal)"));

    // a limit below 3^5 skips the enumeration and reports a resource limit
    let o = securesum(&["audit", "--scheme", path(&scheme), "--mi", "--mi-limit", "100"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("skipped"));

    let general = dir.path().join("general.json");
    assert_eq!(code(&securesum(&["keygen", "--config", path(&fixture("three_edge_general_q2.json")), "--out", path(&general)])), 0);
    let o = securesum(&["audit", "--scheme", path(&general), "--mi"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("R_S = 2 (bound unknown, no bound)"));
}

#[test]
fn q5_fixture_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("q5.json");
    let o = securesum(&["keygen", "--fixture", path(&fixture("k5_t2_g2_q5.json")), "--out", path(&scheme)]);
    // three pair sets lose a rank over F_5, so the scheme is written but flagged
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("certificate T={4,5}: rank 5/6 FAIL"));
    assert!(stdout(&o).contains("certificate T={1,2}: rank 6/6 PASS"));

    let o = securesum(&["audit", "--scheme", path(&scheme)]);
    assert_eq!(code(&o), 2);
    let table = stdout(&o);
    let fails: Vec<&str> = table.lines().filter(|l| l.ends_with("FAIL")).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(fails, vec!["{2,4}", "{3,4}", "{4,5}"]);

    // the scheme still computes the sum correctly
    let o = securesum(&["run", "--scheme", path(&scheme), "--random", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let t: Transcript = serde_json::from_str(stdout(&o).split("decoded sum").next().unwrap()).unwrap();
    assert!(t.summary.decoded_matches && !t.summary.scheme_certified);
}

#[test]
fn infeasible_and_uncertifiable_keygen() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"schema":1,"scheme":{"type":"symmetric","K":4,"T":2,"G":3},"q":251,"seed":1}"#).unwrap();
    assert_eq!(code(&securesum(&["keygen", "--config", path(&cfg)])), 2);
    std::fs::write(&cfg, r#"{"schema":1,"scheme":{"type":"symmetric","K":3,"T":0,"G":2},"q":2,"seed":1,"max_attempts":0}"#).unwrap();
    let o = securesum(&["keygen", "--config", path(&cfg)]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("larger field"));
    std::fs::write(&cfg, r#"{"schema":1,"scheme":{"type":"symmetric","K":3,"T":0,"G":2},"q":251}"#).unwrap();
    assert_eq!(code(&securesum(&["keygen", "--config", path(&cfg)])), 1, "seed is mandatory");
    assert_eq!(code(&with_env_seed(&["keygen", "--config", path(&cfg)], "9")), 0);
    // general scheme on an infeasible instance is written and flagged
    std::fs::write(&cfg, r#"{"schema":1,"scheme":{"type":"general","K":4,"edges":[[1,2,4],[2,3],[3,4]],"collusion":[[4]]},"q":5}"#).unwrap();
    let o = securesum(&["keygen", "--config", path(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("certificate T={4}: rank 1/2 FAIL"));
}

#[test]
fn seeds_and_redaction() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("s.json");
    let cfg = path(&fixture("k3_t0_g2_q251.json")).to_string();
    assert_eq!(code(&securesum(&["keygen", "--config", &cfg, "--out", path(&scheme)])), 0);
    let from_config = std::fs::read(&scheme).unwrap();
    assert_eq!(code(&with_env_seed(&["keygen", "--config", &cfg, "--out", path(&scheme)], "8")), 0);
    let from_env = std::fs::read(&scheme).unwrap();
    assert_ne!(from_config, from_env);
    assert_eq!(code(&with_env_seed(&["keygen", "--config", &cfg, "--seed", "7", "--out", path(&scheme)], "8")), 0);
    assert_eq!(std::fs::read(&scheme).unwrap(), from_config, "--seed beats the environment");

    assert_eq!(code(&securesum(&["run", "--scheme", path(&scheme), "--random"])), 1, "run needs a seed");
    let o = securesum(&["run", "--scheme", path(&scheme), "--random", "--seed", "4", "--redact-keys"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"keys\": null"));
    let too_long = dir.path().join("in.json");
    std::fs::write(&too_long, r#"{"schema":1,"inputs":[[1,2,3,4],[0],[0]]}"#).unwrap();
    assert_eq!(code(&securesum(&["run", "--scheme", path(&scheme), "--inputs", path(&too_long), "--seed", "1"])), 5);
    std::fs::write(&too_long, r#"{"schema":1,"inputs":[[251],[0],[0]]}"#).unwrap();
    assert_eq!(code(&securesum(&["run", "--scheme", path(&scheme), "--inputs", path(&too_long), "--seed", "1"])), 5);
}

#[test]
fn tampered_scheme_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("s.json");
    assert_eq!(code(&securesum(&["keygen", "--config", path(&fixture("k3_t0_g2_q251.json")), "--out", path(&scheme)])), 0);
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&scheme).unwrap()).unwrap();
    let entry = &mut v["scheme"]["groups"][0]["blocks"][0]["entries"][0][0];
    *entry = ((entry.as_u64().unwrap() + 1) % 251).into();
    std::fs::write(&scheme, serde_json::to_string(&v).unwrap()).unwrap();
    let o = securesum(&["audit", "--scheme", path(&scheme)]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("do not sum to zero"));
}
