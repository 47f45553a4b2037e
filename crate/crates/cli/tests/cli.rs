use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcmwalk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcmwalk"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn scenario1_writes_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcmwalk(&["scenario1", "--jobs", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&dir.path().join("grid.csv"));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dcmwalk scenario1 config="));
    assert!(lines.next().unwrap().starts_with("c0,cdot0,verdict"));
    assert_eq!(lines.count(), 441);
}

#[test]
fn plan_has_six_footprints_past_home() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcmwalk(&["plan", "--dump-gains"], dir.path());
    assert!(out.status.success());
    let feet = read(&dir.path().join("footprints.csv"));
    // comment, header, two home feet, six steps
    assert_eq!(feet.lines().count(), 10);
    let plan = read(&dir.path().join("plan.csv"));
    assert_eq!(plan.lines().nth(1).unwrap(), "t,zmp_x,zmp_y,com_x,com_y,comd_x,comd_y,dcm_x,dcm_y,swing_x,swing_y,swing_z");
    assert!(read(&dir.path().join("gains.csv")).lines().nth(1).unwrap().starts_with("matrix,"));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dcmwalk(&["walk", "--seed", "7"], dir.path());
        assert!(out.status.success());
    }
    let x = fs::read(a.path().join("walk.csv")).unwrap();
    let y = fs::read(b.path().join("walk.csv")).unwrap();
    assert_eq!(x, y);
    assert!(String::from_utf8(x).unwrap().lines().next().unwrap().ends_with("seed=7"));
}

#[test]
fn scenario2_reports_three_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcmwalk(&["scenario2"], dir.path());
    assert!(out.status.success());
    let text = read(&dir.path().join("sweep.csv"));
    assert_eq!(text.lines().filter(|l| l.starts_with("f_max,")).count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("improvement,")).count(), 3);
}

#[test]
fn bad_config_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"mass": -1.0, "k_f": 2.0, "dt": 0.0}"#).unwrap();
    let out = dcmwalk(&["plan", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for field in ["mass", "k_f", "dt"] {
        assert!(err.contains(field), "{err}");
    }
    assert!(!dir.path().join("plan.csv").exists());
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    fs::write(&cfg, r#"{"masss": 30.0}"#).unwrap();
    let out = dcmwalk(&["walk", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
}
