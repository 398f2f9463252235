use std::process::Command;

fn chainloc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_chainloc")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = chainloc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("n60.txt");
    ok(&["generate", "--n", "60", "--out", inst.to_str().unwrap()]);
    let from_file = ok(&["solve", "--instance", inst.to_str().unwrap(), "--p", "2", "--starts", "3"]);
    let generated = ok(&["solve", "--n", "60", "--p", "2", "--starts", "3"]);
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_owned()).collect::<Vec<_>>();
    assert_eq!(strip(&from_file), strip(&generated));
    assert_eq!(from_file.lines().next().unwrap(), "n,p,pi,decay,lambda,proportion,total_share,starts,minutes");
}

#[test]
fn solve_json_carries_layout() {
    let out = ok(&["solve", "--n", "40", "--p", "3", "--decay", "exp", "--pi", "0.5", "--starts", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["layout"].as_array().unwrap().len(), 3);
    assert_eq!(v[0]["decay"], "exp");
}

#[test]
fn grid_writes_tables_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = ok(&[
        "grid", "--n", "30", "--p", "1,2", "--pi", "0,1", "--decay", "power", "--starts", "2", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.contains("Results for n=30 (Power Decay, lambda=2)"));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(body.lines().count(), 5);
}

#[test]
fn grid_reports_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = chainloc(&["grid", "--n", "30", "--p", "1", "--pi", "0", "--instances-dir", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED n=30"));
}

#[test]
fn oracle_baseline_and_locations() {
    let o = ok(&["oracle", "--n", "40", "--resolution", "101"]);
    assert!(o.starts_with("x,y,total_share,proportion\n"));
    let b = ok(&["baseline", "--n", "40", "--p", "2", "--trials", "50"]);
    let mean: f64 = b.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(mean > 0.0 && mean < 1.0);
    let l = chainloc(&["locations", "--n", "40", "--p", "4", "--starts", "1"]);
    assert!(l.status.success());
    let rows = String::from_utf8(l.stdout).unwrap();
    assert_eq!(rows.lines().count(), 1 + 40 + 10 + 10 + 4);
    assert!(String::from_utf8_lossy(&l.stderr).contains("new facilities located at a cluster"));
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(!chainloc(&["solve", "--pi", "1.5"]).status.success());
    assert!(!chainloc(&["solve", "--seed", "25"]).status.success());
    assert!(!chainloc(&["oracle", "--resolution", "50"]).status.success());
    assert!(!chainloc(&["solve", "--instance", "/nonexistent/file.txt"]).status.success());
}
