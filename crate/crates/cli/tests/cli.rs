//! End-to-end tests of the command-line binary: exit-code contract,
//! byte-determinism, and the shipped schema files.

use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_freeboundary");

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn binary");
    child.stdin.as_mut().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().expect("collect output")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad stdout JSON ({e}): {:?}", String::from_utf8_lossy(&out.stdout))
    })
}

const SN_2INF: &str = r#"{"default":"0","exp":{"2":"inf"}}"#;

#[test]
fn ckk_boundary_algebra_shape() {
    let out = run(&["ck-k", "--n", "2", "--index", "1"], "");
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["k0"]["freeRank"], 2);
    assert_eq!(v["k0"]["torsion"], serde_json::json!([]));
    assert_eq!(v["unitOrder"], 1);
    assert_eq!(v["k1Rank"], 2);
    assert!(v["citations"].is_array());
}

#[test]
fn ckk_index_two_reports_connecting_divisors() {
    let out = run(&["ck-k", "--n", "2", "--index", "2"], "");
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["k0"]["freeRank"], 3);
    assert_eq!(v["k0"]["torsion"], serde_json::json!([2]));
    assert_eq!(v["connectingDivisors"], serde_json::json!([1, 2]));
}

#[test]
fn classify_exit_codes_separate_decisions_from_errors() {
    let equal = format!(r#"{{"a":{{"n":2,"ns":[{SN_2INF}]}},"b":{{"n":2,"ns":[{SN_2INF}]}}}}"#);
    let out = run(&["classify"], &equal);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["verdict"]["equivalent"].as_bool().unwrap());

    let differ = format!(
        r#"{{"a":{{"n":2,"ns":[{SN_2INF}]}},"b":{{"n":2,"ns":[{{"default":"0","exp":{{"2":"inf","3":"1"}}}}]}}}}"#
    );
    let out = run(&["classify"], &differ);
    assert_eq!(out.status.code(), Some(4), "inequivalence is a decision, not an error");
    let v = json_of(&out);
    assert!(!v["verdict"]["equivalent"].as_bool().unwrap());
    assert!(v["verdict"]["distinguisher"].as_str().unwrap().contains("torsion"));
    assert_eq!(v["verdict"]["conditions"].as_array().unwrap().len(), 7);

    let out = run(&["classify"], "not json");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn resource_cap_exits_three() {
    let req = format!(r#"{{"n":2,"factors":[{SN_2INF}],"levelCount":30,"emitLevel":30}}"#);
    let out = run(&["tower", "--cap", "1000"], &req);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn byte_identical_output_for_identical_requests() {
    let req = r#"{"kind":"cyclicKernel","n":2,"j":1,"k":2}"#;
    let a = run(&["theta"], req);
    let b = run(&["theta"], req);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a)["partition"].as_bool().unwrap());
}

#[test]
fn verify_conn_all_identities_hold() {
    for (n, k) in [("2", "2"), ("2", "3"), ("3", "2")] {
        let out = run(&["verify-conn", "--n", n, "--k", k], "");
        assert_eq!(out.status.code(), Some(0), "n={n} k={k}");
        let v = json_of(&out);
        assert!(v["allHold"].as_bool().unwrap());
        assert!(v["checks"].as_array().unwrap().len() >= 4);
    }
}

#[test]
fn sn_seq_equiv_and_negative_decision() {
    let req = format!(r#"{{"op":"seqEquiv","left":[{SN_2INF}],"right":[{SN_2INF}]}}"#);
    let out = run(&["sn"], &req);
    assert_eq!(out.status.code(), Some(0));
    assert!(!json_of(&out)["witness"].is_null());

    let req = format!(
        r#"{{"op":"seqEquiv","left":[{SN_2INF}],"right":[{{"default":"0","exp":{{"3":"inf"}}}}]}}"#
    );
    let out = run(&["sn"], &req);
    assert_eq!(out.status.code(), Some(4), "absent witness is a decision");
    assert!(json_of(&out)["witness"].is_null());
}

#[test]
fn pv_rank_roundtrip() {
    let out = run(&["pv-rank"], r#"{"graph":{"kind":"trivial","n":2},"depth":2}"#);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["report"]["rank"], 2);
    assert!(v["report"]["certified"].as_bool().unwrap());
}

#[test]
fn minimality_certificate_roundtrip() {
    let req = r#"{"graph":{"kind":"trivial","n":2},"boundaryDepth":1,"wordLengthCap":4}"#;
    let out = run(&["minimality"], req);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["certificate"]["certified"].as_bool().unwrap());

    let req = r#"{"graph":{"kind":"trivial","n":2},"boundaryDepth":1,"wordLengthCap":0}"#;
    let out = run(&["minimality"], req);
    assert_eq!(out.status.code(), Some(4), "uncertified is a decision");
}

#[test]
fn tower_schedule_and_level_graph() {
    let req = format!(r#"{{"n":2,"factors":[{SN_2INF}],"levelCount":3,"emitLevel":1}}"#);
    let out = run(&["tower"], &req);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["levels"], serde_json::json!([[1, 2], [1, 2], [1, 2]]));
    assert_eq!(v["indices"], serde_json::json!([1, 2, 4, 8]));
    assert_eq!(v["graph"]["edges"].as_array().unwrap().len(), 2);
}

#[test]
fn schema_files_ship_and_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas");
    let expected = [
        "common", "sn", "invariant", "classify", "ck-k", "theta", "verify-conn", "tower",
        "pv-rank", "minimality",
    ];
    for name in expected {
        let path = format!("{dir}/{name}.schema.json");
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["$schema"].is_string(), "{name} missing $schema");
    }
}
