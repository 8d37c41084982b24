use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multirepair")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn curve_csv_header_and_rows() {
    let o = run(&["tradeoff", "curve", "--params", "1,12,8,10,2", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "gamma_num,gamma_den,alpha_num,alpha_den,segment");
    assert_eq!(lines.last().unwrap(), &"5,8,1,8,3");
}

#[test]
fn curve_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "c.json");
    let o = run(&["tradeoff", "curve", "--params", "1,11,8,10,1", "--samples", "5", "--out", &out]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["dense"].as_array().unwrap().len(), 5);
}

#[test]
fn point_and_mbcr() {
    let o = run(&["tradeoff", "point", "--params", "1,12,8,10,2"]);
    let v = json(&o);
    assert_eq!(v["msmr"]["alpha"], "1/8");
    let o = run(&["tradeoff", "point", "--params", "1,12,8,10,2", "--alpha", "1/8"]);
    assert_eq!(json(&o)["optimal"]["gamma"], "5/8");
    let o = run(&["tradeoff", "mbcr", "--params", "1,10,7,7,3"]);
    assert_eq!(json(&o)["on_tradeoff"], true);
    let o = run(&["tradeoff", "mbcr", "--params", "1,11,8,8,3"]);
    assert_eq!(json(&o)["on_tradeoff"], false);
}

#[test]
fn compare_ratio() {
    let o = run(&["tradeoff", "compare", "--params", "1,12,7,9,3"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["msmr_ratio_fewer"], "7/9");
}

#[test]
fn infeasible_parameters_exit_2() {
    let o = run(&["tradeoff", "point", "--params", "1,12,8,10,3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["tradeoff", "point", "--params", "1,12,8,10,2", "--gamma", "1/100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_encode_repair_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let code = p(dir.path(), "code.json");
    let shards = p(dir.path(), "shards.json");
    let surv = p(dir.path(), "surv.json");
    assert!(run(&["code", "build", "--family", "ia", "--n", "8", "--k", "4", "--field", "5", "--out", &code]).status.success());
    assert!(run(&["code", "encode", "--code", &code, "--seed", "4", "--out", &shards]).status.success());
    let all: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(&shards).unwrap()).unwrap();
    let kept: Vec<Value> = all.iter().filter(|s| ![1, 4, 6].contains(&s["node"].as_u64().unwrap())).cloned().collect();
    std::fs::write(&surv, serde_json::to_string(&kept).unwrap()).unwrap();

    let o = run(&["code", "repair", "--code", &code, "--shards", &surv, "--failed", "1,4,6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["shards"][0], all[1]);
    assert_eq!(v["shards"][1], all[4]);
    assert_eq!(v["shards"][2], all[6]);
    assert_eq!(v["transcript"]["total"], 15);

    let o = run(&["code", "reconstruct", "--code", &code, "--shards", &surv, "--nodes", "0,3,5,7"]);
    assert!(o.status.success());
    let msg = json(&o);
    let first: Vec<Value> = all[0]["symbols"].as_array().unwrap().clone();
    assert_eq!(msg.as_array().unwrap()[..4], first[..]);
}

#[test]
fn encode_explicit_message() {
    let dir = tempfile::tempdir().unwrap();
    let code = p(dir.path(), "code.json");
    let msg = p(dir.path(), "msg.json");
    assert!(run(&["code", "build", "--family", "mds", "--n", "6", "--k", "2", "--d", "3", "--field", "5", "--out", &code]).status.success());
    std::fs::write(&msg, "[1,2,3,4,5,6]").unwrap();
    let o = run(&["code", "encode", "--code", &code, "--message", &msg]);
    let v = json(&o);
    assert_eq!(v[0]["symbols"], serde_json::json!([1, 2, 3]));
    assert_eq!(v[1]["symbols"], serde_json::json!([4, 5, 6]));
}

#[test]
fn sweep_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let code = p(dir.path(), "code.json");
    assert!(run(&["code", "build", "--family", "pm", "--n", "11", "--k", "6", "--field", "6:43", "--out", &code]).status.success());
    let o = run(&["code", "sweep", "--code", &code, "--e", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    let singular: Vec<&Value> = v["outcomes"].as_array().unwrap().iter().filter(|x| x["singular"] == true).collect();
    assert_eq!(singular.len(), 2);
    assert_eq!(singular[0]["pattern"], serde_json::json!([0, 1]));
}

#[test]
fn sweep_success_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let code = p(dir.path(), "code.json");
    assert!(run(&["code", "build", "--family", "ambr", "--n", "7", "--k", "3", "--d", "4", "--d-max", "5", "--field", "6", "--out", &code]).status.success());
    let a = run(&["code", "sweep", "--code", &code, "--e", "2", "--sample", "6", "--seed", "11"]);
    let b = run(&["code", "sweep", "--code", &code, "--e", "2", "--sample", "6", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["outcomes"][0]["bandwidth"], 35);
}

#[test]
fn search_found_and_not_found() {
    let o = run(&["code", "search", "--family", "ia", "--n", "8", "--k", "4", "--e-max", "4", "--field", "5", "--budget", "2"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["descriptor"]["family"], "ia");
    let o = run(&["code", "search", "--family", "pm", "--n", "11", "--k", "6", "--e-max", "2", "--field", "3", "--budget", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_inputs() {
    let o = run(&["tradeoff", "curve", "--params", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["code", "build", "--family", "xyz", "--n", "4", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["code", "sweep", "--code", "/no/such/file.json", "--e", "2"]);
    assert_eq!(o.status.code(), Some(1));
}
