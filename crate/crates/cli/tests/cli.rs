use std::path::Path;
use std::process::{Command, Output};

use hadamard_jsr::verify::worked_example;

fn hjsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjsr")).args(args).output().expect("hjsr runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write_example(dir: &Path, id: &str, value: f64) -> String {
    let path = dir.join(format!("ex{id}-{value}.json"));
    std::fs::write(&path, worked_example(id).unwrap().instance(value).to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_example(dir.path(), "3.4", 0.4);
    let bad = write_example(dir.path(), "3.4", 0.3);
    assert_eq!(code(&hjsr(&["check", "--entry", "T3.3odd", "--instance", &good])), 0);
    let o = hjsr(&["check", "--entry", "T3.3odd", "--instance", &bad, "--allow-out-of-regime"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("ViolationCertified"));
    let o = hjsr(&["check", "--entry", "T3.3odd", "--instance", &bad]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha < 1/m"));
    assert_eq!(code(&hjsr(&["check", "--entry", "T3.3odd", "--instance", "/nonexistent/x.json"])), 3);
    assert_eq!(code(&hjsr(&["check", "--entry", "T9.9", "--instance", &good])), 3);
    assert_eq!(code(&hjsr(&["check", "--entry", "T3.3odd", "--instance", &good, "--tol", "0"])), 3);
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = worked_example("3.4").unwrap().instance(0.4).to_json().replace("\"alpha\"", "\"alpah\"");
    std::fs::write(&path, text).unwrap();
    let o = hjsr(&["check", "--entry", "T3.3odd", "--instance", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
}

#[test]
fn check_writes_report_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_example(dir.path(), "3.4", 0.4);
    let out = dir.path().join("r.json");
    let o = hjsr(&["check", "--entry", "T3.3odd", "--instance", &good, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tol"], 1e-9);
    assert_eq!(v["config"]["max_depth"], 10);
    assert_eq!(v["config"]["budget_products"], 2_000_000);
    assert_eq!(v["verdict"]["status"], "confirmed");
}

#[test]
fn fuzz_all_small_never_reports_violations() {
    let o = hjsr(&["fuzz", "--entries", "all", "--count", "10", "--seed", "7", "--json"]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 26);
    assert!(v["entries"][0].get("runtime_ms").is_none());
}

#[test]
fn fuzz_input_errors() {
    assert_eq!(code(&hjsr(&["fuzz", "--entries", "T3.5", "--count", "0"])), 3);
    assert_eq!(code(&hjsr(&["fuzz", "--entries", "T3.5", "--count", "2", "--dim", "0..9"])), 3);
    assert_eq!(code(&hjsr(&["fuzz", "--entries", "T3.5", "--count", "2", "--sparsity", "1.5"])), 3);
    assert_eq!(code(&hjsr(&["fuzz", "--entries", "nope", "--count", "2"])), 3);
    assert_eq!(code(&hjsr(&["fuzz", "--bogus-flag"])), 3);
}

#[test]
fn fuzz_is_deterministic_and_timing_is_opt_in() {
    let args = ["fuzz", "--entries", "T3.2odd,L3.1", "--count", "5", "--seed", "3", "--json"];
    let a = hjsr(&args);
    let b = hjsr(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut timed = args.to_vec();
    timed.push("--timing");
    let v: serde_json::Value = serde_json::from_slice(&hjsr(&timed).stdout).unwrap();
    assert!(v["entries"][0]["runtime_ms"].is_u64());
}

#[test]
fn examples_command() {
    let o = hjsr(&["examples", "--id", "3.4"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("1.414213562"), "{s}");
    assert!(s.contains("8.000000000"), "{s}");
    assert!(s.contains("0.333333333"), "{s}");
    assert_eq!(code(&hjsr(&["examples"])), 0);
    assert_eq!(code(&hjsr(&["examples", "--id", "9.9"])), 3);
    let s = String::from_utf8_lossy(&hjsr(&["examples", "--id", "3.12"]).stdout).to_string();
    assert!(s.contains("(printed)") && s.contains("(oracle)"), "{s}");
}

#[test]
fn catalog_list() {
    let o = hjsr(&["catalog", "list", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 26);
    assert!(ids.contains(&"T3.3odd") && ids.contains(&"C3.17"));
}

#[test]
fn gen_kernel_feeds_check_and_jsr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&hjsr(&["gen-kernel", "--kind", "const", "--n", "2", "--out", p])), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["sets"][0]["matrices"][0]["rows"], serde_json::json!([[0.5, 0.5], [0.5, 0.5]]));
    assert_eq!(code(&hjsr(&["check", "--entry", "L3.1", "--instance", p])), 0);
    let o = hjsr(&["jsr", "--instance", p, "--json"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["sets"][0]["jsr"]["lo"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(code(&hjsr(&["gen-kernel", "--kind", "cosine", "--n", "2"])), 3);
    assert_eq!(code(&hjsr(&["gen-kernel", "--kind", "gauss", "--c", "-1", "--n", "2"])), 3);
    let gp = dir.path().join("g.json");
    let g = gp.to_str().unwrap();
    assert_eq!(code(&hjsr(&["gen-kernel", "--kind", "gauss", "--c", "2", "--n", "4", "--copies", "3", "--out", g])), 0);
    assert_eq!(code(&hjsr(&["check", "--entry", "T3.2odd", "--instance", g])), 0);
}
