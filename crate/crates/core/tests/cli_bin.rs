use std::process::Command;

fn rieszpol() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rieszpol"))
}

#[test]
fn solve_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rieszpol()
        .args(["solve", "--set", "circle", "--n", "3", "--s", "2", "--seed", "42", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["schema"], "rieszpol-report/1");
    assert_eq!(v["status"], "ok");
    assert!(v["wall_time_seconds"].is_null());
    let listed = String::from_utf8_lossy(&out.stdout);
    assert!(listed.lines().any(|l| l.ends_with("report.json")));
}

#[test]
fn unknown_set_exits_two() {
    let out = rieszpol().args(["solve", "--set", "moebius", "--n", "3", "--seed", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_exits_two() {
    let out = rieszpol().args(["solve", "--set", "circle", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn bad_config_file_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "command = \"solve\"\nseed = 1\nn = [3]\nbogus = 4\n[set]\nkind = \"circle\"\n").unwrap();
    let out = rieszpol().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn config_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = rieszpol()
        .args(["config", "alpha", "--set", "circle", "--epsilon", "0.5,0.1,0.01", "--out"])
        .arg(dir.path().join("res"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("alpha.toml");
    std::fs::write(&path, &out.stdout).unwrap();
    let run = rieszpol().arg("run").arg(&path).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(dir.path().join("res/report.json").exists());
}
