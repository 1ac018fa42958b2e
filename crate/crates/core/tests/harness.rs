use std::path::Path;

use serde_json::Value;
use xsb_lab::harness::{parse_plotdata, run_experiment, Experiment, ExperimentConfig};
use xsb_lab::LabError;

fn config(experiment: Experiment, dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        seed: 42,
        output_dir: dir.to_path_buf(),
        phase: Default::default(),
    }
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn counterexample_ratio_slope_at_minus_one_half() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ce");
    let cfg = config(Experiment::default_for("counterexample_scaling").unwrap(), &dir);
    let bundle = run_experiment(&cfg).unwrap();
    assert!(bundle.passed() && !bundle.incomplete());
    let s = summary(&dir);
    // −2s − 1/2 at s = −1/2.
    let slope = s["results"]["slope_ratio"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.1, "{slope}");
    assert_eq!(s["config"], serde_json::to_value(&cfg).unwrap());
    assert!(!s["refs"].as_array().unwrap().is_empty());
    let table = std::fs::read_to_string(dir.join("tables/counterexample.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    let series = parse_plotdata(&std::fs::read_to_string(dir.join("plotdata/ratio.dat")).unwrap()).unwrap();
    assert_eq!(series.points.len(), 5);
}

#[test]
fn free_evolution_conserves_mass_to_rounding() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("free");
    let mut cfg = config(Experiment::default_for("evolve").unwrap(), &dir);
    cfg.phase.gamma = [0.0, 0.0];
    let bundle = run_experiment(&cfg).unwrap();
    let drift = bundle.result("max_l2_drift").unwrap().as_f64().unwrap();
    assert!(drift < 1e-12, "{drift}");
    let dump = xsb_lab::dynamics::read_xsbt(std::fs::File::open(dir.join("trajectory.xsbt")).unwrap()).unwrap();
    assert_eq!(dump.nx, 256);
    assert_eq!(dump.nt, 1001);
}

#[test]
fn complex_coupling_skips_conservation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(Experiment::default_for("evolve").unwrap(), &tmp.path().join("d"));
    cfg.phase.gamma = [1.0, -0.5];
    let bundle = run_experiment(&cfg).unwrap();
    assert!(bundle.verdicts.iter().all(|v| v.name != "l2_conserved"));
    assert!(bundle.result("conservation_skipped").is_some());
}

#[test]
fn same_config_and_seed_give_identical_tables() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["counterexample_scaling", "continuous_dependence", "trilinear_search"] {
        let mut exp = Experiment::default_for(kind).unwrap();
        if let Experiment::TrilinearSearch(p) = &mut exp {
            p.ensemble = 20;
            p.bump_ns = vec![64.0, 128.0];
        }
        let read = |name: &str| {
            let dir = tmp.path().join(format!("{kind}-{name}"));
            run_experiment(&config(exp.clone(), &dir)).unwrap();
            let mut tables = Vec::new();
            for e in std::fs::read_dir(dir.join("tables")).unwrap() {
                let p = e.unwrap().path();
                tables.push((p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap()));
            }
            tables.sort();
            tables
        };
        let (a, b) = (read("a"), read("b"));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn different_seeds_change_random_experiments() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = Experiment::default_for("continuous_dependence").unwrap();
    let mut a = config(exp.clone(), &tmp.path().join("a"));
    let mut b = config(exp, &tmp.path().join("b"));
    a.seed = 1;
    b.seed = 2;
    run_experiment(&a).unwrap();
    run_experiment(&b).unwrap();
    let t = |d: &str| std::fs::read(tmp.path().join(d).join("tables/dependence.csv")).unwrap();
    assert_ne!(t("a"), t("b"));
}

#[test]
fn validation_lists_every_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exp = Experiment::default_for("uniform_bound").unwrap();
    if let Experiment::UniformBound(p) = &mut exp {
        p.rho = 0.3;
        p.b = 0.5;
        p.z.clear();
    }
    let cfg = config(exp, &tmp.path().join("never"));
    match run_experiment(&cfg) {
        Err(LabError::Validation(errs)) => {
            assert_eq!(errs.len(), 3, "{errs:?}");
            assert!(errs.iter().any(|e| e.contains("(0, 1/4)")));
            assert!(errs.iter().any(|e| e.contains("(7/12, 11/12)")));
        }
        other => panic!("expected validation error, got {other:?}"),
    }
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn failed_points_still_emit_an_incomplete_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("big");
    let mut exp = Experiment::default_for("picard_vs_splitstep").unwrap();
    if let Experiment::PicardVsSplitstep(p) = &mut exp {
        p.data.l2_norm = Some(5.0);
        p.order_dts.clear();
    }
    let bundle = run_experiment(&config(exp, &dir)).unwrap();
    assert!(bundle.incomplete());
    let s = summary(&dir);
    assert_eq!(s["incomplete"], Value::Bool(true));
    assert!(s["failures"][0].as_str().unwrap().contains("Picard"));
}

#[test]
fn rerun_replaces_the_report_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("r");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("stale.txt"), "old").unwrap();
    run_experiment(&config(Experiment::default_for("lemma_suite").unwrap(), &dir)).unwrap();
    assert!(!dir.join("stale.txt").exists());
    assert!(dir.join("summary.json").exists());
    let leftovers: Vec<_> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().starts_with(".xsb-report"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}
