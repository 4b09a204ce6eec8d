use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mfapc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfapc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_trace_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let o = mfapc(&["run", "--config", "ex11", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.path().join("ex11");
    let csv = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
    let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("final_steady_error"));
}

#[test]
fn run_accepts_a_config_file() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("mine.cfg");
    fs::write(&cfg, "[plant]\nkind = linear_ex11\n[run]\nname = mine\nsteps = 20\n").unwrap();
    let o = mfapc(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.path().join("mine/trace.csv").exists());
}

#[test]
fn sweep_writes_one_trace_per_value() {
    let out = tempfile::tempdir().unwrap();
    let o = mfapc(&[
        "sweep",
        "--config",
        "ex11",
        "--param",
        "lambda",
        "--values",
        "0,1e-4,1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let base = out.path().join("ex11");
    let traces = fs::read_dir(&base).unwrap().filter(|e| e.as_ref().unwrap().path().join("trace.csv").exists()).count();
    assert_eq!(traces, 3);
    let table = stdout(&o);
    let zero_row = table.lines().find(|l| l.split_whitespace().next() == Some("0")).unwrap();
    let steady: f64 = zero_row.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(steady.abs() < 1e-6, "{zero_row}");
}

#[test]
fn analyze_reports_stable_loop() {
    let o = mfapc(&["analyze", "--config", "ex11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("STABLE, max|pole|="));
    assert!(text.contains("steady_state_error_step"));
}

#[test]
fn analyze_reports_unstable_loop_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("unstable.cfg");
    fs::write(
        &cfg,
        "[plant]\nkind = linear_ex11\n[estimator]\nsource = frozen\nmatrix = 0, 0, 0, 0, 0, 0; 0, 0, 0, 0, 0, 0\n",
    )
    .unwrap();
    let o = mfapc(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("UNSTABLE, max|pole|="), "{}", stdout(&o));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[plant]\nkind = nothing\n").unwrap();
    let o = mfapc(&["run", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("configuration error"));

    let missing = mfapc(&["analyze", "--config", "/no/such/file.cfg"]);
    assert_eq!(missing.status.code(), Some(3));

    let diverging = dir.path().join("diverging.cfg");
    fs::write(
        &diverging,
        "[plant]\nkind = linear_ex11\n[estimator]\nsource = frozen\nmatrix = 0, 0, -1, 0, 0, 0; 0, 0, 0, -1, 0, 0\n[run]\nname = d\n",
    )
    .unwrap();
    let o = mfapc(&["run", "--config", diverging.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(Path::new(&dir.path().join("d/trace.csv")).exists());
}

#[test]
fn examples_lists_and_writes_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfapc(&["examples", "--write", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    for name in ["ex11", "ex11-disturbance", "ex12", "ex13", "ex2", "ex11-mfac", "ex2-mfac"] {
        assert!(names.iter().any(|n| n == name), "{name}");
        assert!(dir.path().join(format!("{name}.cfg")).exists());
    }
}
