use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omnisec"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_motivating_example() {
    let m = data("motivating.json");
    let r = json(&run(&["analyze", path_str(&m)]));
    assert_eq!(r["result"]["c_w"]["num"], 1);
    assert_eq!(r["result"]["c_w"]["den"], 1);
    assert_eq!(r["result"]["c_w"]["log_base"], 2);
    assert_eq!(r["result"]["r_l"]["num"], 1);
    assert_eq!(r["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn build_verify_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let m = data("motivating.json");
    let s = dir.path().join("scheme.json");
    let r = json(&run(&["build-scheme", path_str(&m), "--seed", "4", "--scheme-out", path_str(&s)]));
    assert_eq!(r["result"]["verification"]["omniscience"], true);
    assert_eq!(r["result"]["verification"]["leakage"]["num"], 1);
    let v = json(&run(&["verify", path_str(&m), path_str(&s)]));
    assert_eq!(v["result"]["alignment"], true);
    let sim = json(&run(&["simulate", path_str(&m), path_str(&s), "--samples", "10000"]));
    assert_eq!(sim["result"]["recovery_failures"], 0);
    assert_eq!(sim["result"]["samples"], 10000);
}

#[test]
fn bundled_scheme_verifies() {
    let v = json(&run(&["verify", path_str(&data("motivating.json")), path_str(&data("motivating_scheme.json"))]));
    assert_eq!(v["result"]["omniscience"], true);
    assert_eq!(v["result"]["leakage"]["num"], 1);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = data("motivating.json");
    let mut outs = Vec::new();
    for k in 0..2 {
        let o = dir.path().join(format!("r{k}.json"));
        let s = dir.path().join(format!("s{k}.json"));
        let st = run(&["build-scheme", path_str(&m), "--seed", "9", "--scheme-out", path_str(&s), "-o", path_str(&o)]);
        assert!(st.status.success());
        outs.push((std::fs::read(&o).unwrap(), std::fs::read(&s).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn unit_method_and_reduce() {
    let m = data("motivating.json");
    let r = json(&run(&["build-scheme", path_str(&m), "--method", "unit"]));
    assert_eq!(r["result"]["n"], 2);
    let dir = tempfile::tempdir().unwrap();
    let red = dir.path().join("reduced.json");
    let r = json(&run(&["reduce", path_str(&m), "--model-out", path_str(&red)]));
    assert_eq!(r["result"]["steps"].as_array().unwrap().len(), 0);
    let again = json(&run(&["analyze", path_str(&red)]));
    assert_eq!(again["result"]["c_w"]["num"], 1);
}

#[test]
fn capacity_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cw.csv");
    let r = json(&run(&["capacity", path_str(&data("motivating.json")), "--csv", path_str(&csv)]));
    let pts = r["result"].as_array().unwrap();
    assert_eq!(pts.len(), 21);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("R,C_W(R),"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn classical_dsbe_regions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let r = json(&run(&["classical", "dsbe", "--p", "0.1", "--eps", "0.4", "--csv", path_str(&csv)]));
    assert_eq!(r["result"]["more_capable"]["holds"], true);
    assert_eq!(r["result"]["not_less_noisy"]["holds"], true);
    assert_eq!(r["result"]["two_msg"]["verdict"], "duality-fails");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("q,f(q)"));
    let r = json(&run(&["classical", "dsbe", "--p", "0.1", "--eps", "0.6"]));
    assert_eq!(r["result"]["more_capable"]["holds"], false);
    assert_eq!(r["result"]["two_msg"]["verdict"], "inconclusive");
}

#[test]
fn classical_pmf_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pmf = dir.path().join("bits.json");
    let mut probs = Vec::new();
    for (k, p) in [0.45, 0.05, 0.05, 0.45].iter().enumerate() {
        for z in 0..2 {
            probs.push(p * if z == k / 2 { 0.8 } else { 0.2 });
        }
    }
    let model = serde_json::json!({
        "kind": "pmf", "version": 1,
        "user_alphabets": [["0", "1"], ["0", "1"]],
        "wiretap_alphabet": ["0", "1"],
        "probabilities": probs,
    });
    std::fs::write(&pmf, model.to_string()).unwrap();
    let r = json(&run(&["classical", "positivity", path_str(&pmf)]));
    assert_eq!(r["result"]["check"]["holds"], true);
    let csv = dir.path().join("bs.csv");
    let r = json(&run(&["classical", "block-swap", path_str(&pmf), "--n-max", "10", "--csv", path_str(&csv)]));
    assert_eq!(r["result"]["exceeds_at"], 2);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("n,lhs,rhs,q1"));
    let r = json(&run(&["classical", "oneway", path_str(&pmf), "--direction", "2to1"]));
    assert!(r["result"]["capacity"]["value"].as_f64().unwrap() >= 0.0);
    let r = json(&run(&["classical", "two-msg", path_str(&pmf)]));
    assert!(r["result"]["rl2_lb"].is_number());
    let r = json(&run(&["analyze", path_str(&pmf)]));
    assert_eq!(r["result"]["kind"], "pmf");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"tree-pin","version":1,"q":4,"vertices":2,"edges":[{"u":0,"v":1,"n":1}],"wiretap":[]}"#)
        .unwrap();
    assert_eq!(run(&["analyze", path_str(&bad)]).status.code(), Some(2));
    let cyc = dir.path().join("cycle.json");
    std::fs::write(
        &cyc,
        r#"{"kind":"tree-pin","version":1,"q":2,"vertices":3,"edges":[{"u":0,"v":1,"n":1},{"u":1,"v":2,"n":1},{"u":2,"v":0,"n":1}],"wiretap":[]}"#,
    )
    .unwrap();
    assert_eq!(run(&["analyze", path_str(&cyc)]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["analyze", path_str(&missing)]).status.code(), Some(1));
    // block length 1 leaves too few field elements for the random search
    let m = data("motivating.json");
    let out = run(&["build-scheme", path_str(&m), "--n", "1", "--attempts", "3"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
