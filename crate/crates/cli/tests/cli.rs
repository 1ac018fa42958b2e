use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xsb-lab"))
        .args(args)
        .env("XSB_LAB_THREADS", "1")
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn list_prints_every_experiment() {
    let o = lab(&["--list"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("existence_time"));
}

#[test]
fn passing_run_exits_zero_and_writes_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("lemmas");
    let o = lab(&["lemmas", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("PASS el1_uniform"));
    assert!(dir.join("summary.json").exists());
    assert!(dir.join("tables/lemmas.csv").exists());
}

#[test]
fn config_file_and_overrides_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ev");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments/evolve.toml");
    let o = lab(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        dir.to_str().unwrap(),
        "--t-final",
        "0.1",
        "--set",
        "dump=false",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["experiment"]["t_final"], 0.1);
    assert_eq!(summary["config"]["phase"]["alpha"], 0.5);
    assert!(!dir.join("trajectory.xsbt").exists());
}

#[test]
fn config_of_another_kind_is_rejected() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments/evolve.toml");
    let o = lab(&["picard", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("not `picard_vs_splitstep`"));
}

#[test]
fn invalid_parameters_exit_one_with_every_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x");
    let o = lab(&["lemmas", "--b", "0.4", "--set", "c1=0.2", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let t = text(&o);
    assert!(t.contains("b = 0.4"), "{t}");
    assert!(t.contains("c1 = 0.2"), "{t}");
    assert!(!dir.exists());
}

#[test]
fn unknown_override_is_an_error() {
    let o = lab(&["evolve", "--rho", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("--rho does not apply"));
}

#[test]
fn failed_points_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    let o = lab(&[
        "picard",
        "--set",
        "data.l2_norm=5.0",
        "--set",
        "order_dts=[]",
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(dir.join("summary.json").exists());
}
