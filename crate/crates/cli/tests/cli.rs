use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chgraph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chgraph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn trivial_instance_passes() {
    let o = run(&["check-algebra", "--algebra", data("trivial.alg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5/5 axioms + integral properties: PASS"));
}

#[test]
fn broken_associativity_is_a_mathematical_failure() {
    let text = std::fs::read_to_string(data("trivial.alg")).unwrap().replace("mul 0 1 1 1", "mul 0 1 1 2");
    let o = run(&["check-algebra", "--algebra", scratch("bad.alg", &text).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL superalgebra"));
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn empty_and_missing_files_are_input_errors() {
    let o = run(&["check-algebra", "--algebra", scratch("empty.alg", "").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["check-algebra", "--algebra", "/nonexistent/x.alg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["check-algebra", "--algebra", scratch("junk.alg", "dim 2\nparity ee\nfoo 1\n").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn potential_listings() {
    let o = run(&["potentials", "--genus", "2", "--leaves", "0"]);
    let coeffs: Vec<String> = stdout(&o).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(coeffs, ["1/8", "1/12"]);
    let o = run(&["potentials", "--genus", "0", "--leaves", "3"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("1/6\t"));
    let o = run(&["potentials", "--genus", "1", "--leaves", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn numeric_check_on_the_trivial_instance() {
    let o = run(&["verify-bp", "--mode", "numeric", "--algebra", data("trivial.alg").to_str().unwrap(), "--degree", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("residual: 0"));
    let o = run(&["verify-bp", "--mode", "numeric"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn symbolic_run_is_reproducible_and_writes_the_table() {
    let table = scratch("table.tsv", "");
    let args = ["verify-bp", "--mode", "symbolic", "--table", table.to_str().unwrap(), "--jobs", "2"];
    let a = run(&args);
    let first = std::fs::read_to_string(&table).unwrap();
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, std::fs::read_to_string(&table).unwrap());
    assert_eq!(first.lines().count(), 21);
    assert!(first.lines().skip(1).map(|l| l.split('\t').next().unwrap()).eq((1..=20).map(|i| format!("D{i}"))));
    let ok = stdout(&a).contains("residual: 0");
    assert_eq!(a.status.code(), Some(if ok { 0 } else { 1 }));
}

#[test]
fn strata_errors_and_perturbations() {
    let o = run(&["verify-bp", "--strata", "/nonexistent/strata.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify-bp", "--strata", scratch("bad.txt", "stratum D4\nv 0 genus 1\n").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("D4"));
    let text = std::fs::read_to_string(data("bp_strata.txt")).unwrap();
    let moved = text.replacen("m c at 0", "m c at 1", 1);
    assert_ne!(moved, text);
    let o = run(&["verify-bp", "--strata", scratch("moved.txt", &moved).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("residual:"));
}

#[test]
fn seeded_validation_is_deterministic() {
    let a = run(&["validate", "--seed", "5", "--cases", "20"]);
    let b = run(&["validate", "--seed", "5", "--cases", "20"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 7);
}
