use std::path::PathBuf;
use std::process::{Command, Output};

use reqweaken::milp::{parse_lp, solve, SolveLimits};

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reqweaken")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn monitor_prints_robustness() {
    let o = run(&["monitor", &data("data/altitude.stl"), &data("data/altitude.csv")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "-2.0\n");

    let o = run(&["monitor", &data("data/altitude.stl"), &data("data/altitude.csv"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["robustness"], -2.0);
    assert_eq!(v["satisfied"], false);
}

fn toy(f1: &str, f2: &str, rest: &[&str]) -> Output {
    let (a, b) = (data(&format!("data/{f1}.feature")), data(&format!("data/{f2}.feature")));
    let (m, p) = (data("data/toy.model"), data("data/toy_past.csv"));
    let mut args = vec!["resolve", &a, &b, "--model", &m, "--past", &p];
    args.extend_from_slice(rest);
    run(&args)
}

#[test]
fn resolve_prints_weakening() {
    let o = toy("up", "down", &["--fallback", "up"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "kind = weakened\ntheta.up = [0]\ntheta.down = [2]\ndelta.up = 0\ndelta.down = 2\naction[0] = v=1\naction[1] = v=0\n"
    );
}

#[test]
fn fallback_exits_three() {
    let o = toy("far_up", "far_down", &["--fallback", "far_down"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "kind = fallback\nfallback = far_down\n");
    let o = toy("far_up", "far_down", &["--fallback", "far_down", "--json"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "fallback");
}

#[test]
fn encoded_lp_reads_back_and_solves_the_same() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("toy.lp");
    let (a, b, m, p) = (data("data/up.feature"), data("data/down.feature"), data("data/toy.model"), data("data/toy_past.csv"));
    let o = run(&["encode", &a, &b, "--model", &m, "--past", &p, "--out", lp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let problem = parse_lp(&std::fs::read_to_string(&lp).unwrap()).unwrap();
    let sol = solve(&problem, &SolveLimits::default()).unwrap();
    // total weakening 2 plus the tie-break on theta
    assert!((sol.objective.unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let scenario = data("data/organ_delivery.scenario");
    let o = run(&["simulate", &scenario, "--mode", "priority(land>deliver)", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("mode = priority(land>deliver)\nending = landed\n"), "{out}");
    let rows = std::fs::read_to_string(&trace).unwrap().lines().count();
    assert!(rows > 100);
}

#[test]
fn experiment_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["experiment", "organ_delivery", "2", "--modes", "priority", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2);
    assert!(results.lines().next().unwrap().starts_with("case,scenario,seed,mode,"));
    assert!(out.join("timing.csv").exists() && out.join("summary.txt").exists());
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(run(&["monitor", "missing.stl", &data("data/altitude.csv")]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let scenario = data("data/organ_delivery.scenario");
    assert_eq!(run(&["simulate", &scenario, "--mode", "priority(runaway>boundary)"]).status.code(), Some(2));
    assert_eq!(toy("up", "down", &["--fallback", "nobody"]).status.code(), Some(2));
}
