use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use autostruct::automata::{Alphabet, Automaton};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_autostruct"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn growth_of_a_star_b_star() {
    let dir = TempDir::new().unwrap();
    let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
    let a = Automaton::from_regex(ab, "a*b*").unwrap();
    let f = write(&dir, "ab.json", &a.to_json_value());
    let v = ok_json(&["growth", "--automaton", s(&f)]);
    assert_eq!(v["polynomial"], json!(true));
    assert_eq!(v["degree"], json!(2));
    let c = ok_json(&["count", "--automaton", s(&f), "--length", "4"]);
    assert_eq!(c["counts"], json!([1, 3, 6, 10, 15]));
    let d = ok_json(&["decompose", "--automaton", s(&f)]);
    assert!(!d["patterns"].as_array().unwrap().is_empty());
    ok_json(&["normalize", "--automaton", s(&f)]);
    ok_json(&["exponents", "--automaton", s(&f)]);
}

#[test]
fn decide_commutativity() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("p2.json");
    assert!(run(&["build", "presburger", "--base", "2", "--out", s(&p)]).status.success());
    let v = ok_json(&["decide", "--presentation", s(&p), "--formula", "A x . A y . A z . plus(x,y,z) -> plus(y,x,z)"]);
    assert_eq!(v, json!(true));
    let f = write(&dir, "phi.txt", &json!(0));
    std::fs::write(&f, "E x . plus(x,x,x) & !(x = x)").unwrap();
    let v = ok_json(&["decide", "--presentation", s(&p), "--formula-file", s(&f)]);
    assert_eq!(v, json!(false));
}

#[test]
fn classify_fiber_fixture() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.json", &json!({"m": 2, "n": 1, "graph": "x1 <= x0 & x2 = x0"}));
    let d = dir.path().join("d.json");
    assert!(run(&["eq", "classify", "--fiber", s(&f), "--out", s(&d)]).status.success());
    for k in 1..=5 {
        let c = ok_json(&["eq", "count", "--descriptor", s(&d), "--size", &k.to_string()]);
        assert_eq!(c, json!(1));
    }
}

#[test]
fn ep_build_and_check() {
    let dir = TempDir::new().unwrap();
    let poly = json!({"arity": 1, "monomials": [{"coeff": 1, "exps": [1]}, {"coeff": 1, "exps": [0]}]});
    let pf = write(&dir, "p.json", &poly);
    let pres = dir.path().join("ep.json");
    assert!(run(&["eq", "build", "--poly", s(&pf), "--out", s(&pres)]).status.success());
    let d = write(&dir, "d.json", &json!({"polys": [poly], "infiniteClasses": 0}));
    let r = ok_json(&["eq", "check", "--presentation", s(&pres), "--descriptor", s(&d), "--bound", "4"]);
    assert_eq!(r["pass"], json!(true));
    let m = ok_json(&["eq", "multiset", "--presentation", s(&pres), "--bound", "3"]);
    assert_eq!(m["counts"]["1"], json!(1));
}

#[test]
fn out_files_reparse_to_equal_values() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    assert!(run(&["build", "grid", "--out", s(&a)]).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    let p = autostruct::presentation::Presentation::from_json(&text).unwrap();
    assert_eq!(p, autostruct::presentation::grid_example());
    let g = write(&dir, "g.json", &json!({"n": 1, "terms": [{"matrix": [[1, 2]], "shift": [0]}]}));
    let i = dir.path().join("i.json");
    assert!(run(&["build", "eg", "--gvpf", s(&g), "--out", s(&i)]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&i).unwrap()).unwrap();
    let tau = autostruct::presentation::Interpretation::from_json_value(&v).unwrap();
    assert_eq!(tau.to_json_value(), v);
}

#[test]
fn output_is_deterministic() {
    let args = ["build", "tree", "--base", "2"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.json", &json!({"m": 3, "n": 1, "graph": "x1 < x2 & x2 < x0 & x3 = x0"}));
    let args = ["eq", "classify", "--fiber", s(&f)];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["growth"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["growth", "--automaton", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    let v: Value = serde_json::from_str(&err).unwrap();
    assert!(v["error"].is_string());
    // a domain error from a module
    let f = write(&dir, "f.json", &json!({"m": 1, "n": 1, "graph": "x1 <= x0"}));
    assert_eq!(run(&["eq", "classify", "--fiber", s(&f)]).status.code(), Some(1));
}

#[test]
fn verbose_goes_to_stderr_only() {
    let dir = TempDir::new().unwrap();
    let ab = Alphabet::from_tokens(["a"]).unwrap();
    let f = write(&dir, "a.json", &Automaton::from_regex(ab, "a*").unwrap().to_json_value());
    let quiet = run(&["growth", "--automaton", s(&f)]);
    let loud = run(&["--verbose", "growth", "--automaton", s(&f)]);
    assert_eq!(quiet.stdout, loud.stdout);
    assert!(!loud.stderr.is_empty());
}

#[test]
fn cells_commands() {
    let dir = TempDir::new().unwrap();
    let u = ok_json(&["cells", "decompose", "--formula", "x0 < x1", "--n", "2"]);
    assert_eq!(u["n"], json!(2));
    let cell = write(&dir, "c.json", &json!({"n": 2, "s": 1, "sigma": [0, 1], "d": [0, "inf"]}));
    let f = ok_json(&["cells", "fiber", "--cell", s(&cell), "--m", "1"]);
    assert_eq!(f["n"], json!(1));
    assert_eq!(ok_json(&["cells", "fiber", "--cell", s(&cell), "--m", "1", "--at", "3"]), json!(1));
    let p = ok_json(&["cells", "param", "--cell", s(&cell)]);
    assert_eq!(p["offset"], json!([0, 1]));
}

#[test]
fn semilinear_commands() {
    let dir = TempDir::new().unwrap();
    let set = json!({"n": 3, "disjointSimple": true, "pieces": [
        {"offset": [0, 0, 0], "periods": [[0, 2, 2], [2, 2, 2], [0, 1, 0]]},
        {"offset": [1, 2, 2], "periods": [[0, 2, 2], [2, 2, 2], [0, 1, 0]]},
    ]});
    let f = write(&dir, "s.json", &set);
    assert_eq!(ok_json(&["semilinear", "outdegree", "--set", s(&f), "--k", "2", "--at", "2,6"]), json!(3));
    assert_eq!(ok_json(&["semilinear", "outdegree", "--set", s(&f), "--k", "2", "--at", "3,7"]), json!(2));
    assert_eq!(ok_json(&["semilinear", "outdegree", "--set", s(&f), "--k", "2", "--at", "5,2"]), json!(0));
    assert_eq!(ok_json(&["semilinear", "member", "--set", s(&f), "--point", "1,2,2"]), json!(true));
    assert!(ok_json(&["semilinear", "toformula", "--set", s(&f)]).is_string());
    assert!(ok_json(&["semilinear", "series", "--set", s(&f), "--bound", "3"]).is_array());
}

#[test]
fn reach_successor_on_omega() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("o.json");
    assert!(run(&["build", "omega", "--out", s(&p)]).status.success());
    let step = "le(x,y) & !(x = y) & A z . le(x,z) & le(z,y) -> z = x | z = y";
    let r = ok_json(&["reach", "--presentation", s(&p), "--formula", step, "--inputs", "x", "--output", "y", "--start", "", "--steps", "5"]);
    assert_eq!(r["sizes"], json!([1, 2, 3, 4, 5, 6]));
}
