use num_complex::Complex;
use proptest::prelude::*;
use xsb_lab::counterexample::fit_scaling_exponent;
use xsb_lab::dynamics::{read_xsbt, splitstep_final, write_xsbt, SolveConfig};
use xsb_lab::harness::{parse_plotdata, Experiment, ExperimentConfig, Series};
use xsb_lab::spectral::{free_evolve, l2_norm_samples, sobolev_norm, SpatialSpectrum};
use xsb_lab::{Grid, Phase, Transform};

fn grid() -> Grid {
    Grid::new(20.0, 64, 4.0, 16).unwrap()
}

fn spectrum() -> impl Strategy<Value = SpatialSpectrum<f64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64).prop_filter_map("nonzero", |v| {
        let values: Vec<Complex<f64>> = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
        values.iter().any(|z| z.norm() > 1e-3).then_some(SpatialSpectrum { values })
    })
}

fn phase() -> impl Strategy<Value = Phase> {
    (-1.0..1.0f64, 0.1..2.0f64, -2.0..2.0f64).prop_map(|(a, b, g)| Phase::new(a, b, Complex::new(g, 0.0)).unwrap())
}

fn close(a: &SpatialSpectrum<f64>, b: &SpatialSpectrum<f64>, tol: f64) -> bool {
    a.values.iter().zip(&b.values).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sobolev_norm_is_homogeneous_and_monotone_in_s(u in spectrum(), c in 0.01..10.0f64, s in -1.0..1.0f64, ds in 0.0..1.0f64) {
        let g = grid();
        let n = sobolev_norm(&u, s, &g);
        prop_assert!((sobolev_norm(&u.scaled(c), s, &g) - c * n).abs() <= 1e-12 * c * n);
        prop_assert!(sobolev_norm(&u, s + ds, &g) >= n * (1.0 - 1e-14));
    }

    #[test]
    fn plancherel_between_samples_and_spectrum(u in spectrum()) {
        let g = grid();
        let dft = Transform::new(&g);
        let physical = l2_norm_samples(&dft.samples(&u).unwrap(), &g);
        let spectral = sobolev_norm(&u, 0.0, &g);
        prop_assert!((physical - spectral).abs() <= 1e-12 * spectral);
    }

    #[test]
    fn free_propagator_is_a_unitary_group(u in spectrum(), p in phase(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, s in -1.0..1.0f64) {
        let g = grid();
        let a = free_evolve(&free_evolve(&u, t1, &p, &g).unwrap(), t2, &p, &g).unwrap();
        let b = free_evolve(&u, t1 + t2, &p, &g).unwrap();
        prop_assert!(close(&a, &b, 1e-9));
        let n = sobolev_norm(&u, s, &g);
        prop_assert!((sobolev_norm(&b, s, &g) - n).abs() <= 1e-12 * n);
        let back = free_evolve(&b, -(t1 + t2), &p, &g).unwrap();
        prop_assert!(close(&back, &u, 1e-9));
    }

    #[test]
    fn splitstep_without_coupling_is_free_evolution(u in spectrum(), p in phase(), steps in 1usize..40) {
        let g = grid();
        let dft = Transform::new(&g);
        let free = Phase::new(p.alpha, p.beta, Complex::new(0.0, 0.0)).unwrap();
        let cfg = SolveConfig { dt: 0.05, dealias: xsb_lab::dynamics::Dealias::None, ..SolveConfig::default() };
        let t = steps as f64 * cfg.dt;
        let got = splitstep_final(&u, &cfg, &free, &dft, t).unwrap();
        let want = free_evolve(&u, t, &free, &g).unwrap();
        prop_assert!(close(&got, &want, 1e-10));
    }

    #[test]
    fn splitstep_conserves_mass_for_real_coupling(u in spectrum(), p in phase(), steps in 1usize..40) {
        let g = grid();
        let dft = Transform::new(&g);
        let m0 = sobolev_norm(&u, 0.0, &g);
        let plain = SolveConfig { dt: 0.05, dealias: xsb_lab::dynamics::Dealias::None, ..SolveConfig::default() };
        let got = splitstep_final(&u, &plain, &p, &dft, steps as f64 * plain.dt).unwrap();
        prop_assert!((sobolev_norm(&got, 0.0, &g) - m0).abs() <= 1e-11 * m0);
        // The 2/3 mask removes what the nonlinear substep pushes into the
        // top third, so with it mass can only decrease.
        let cfg = SolveConfig { dt: 0.05, ..SolveConfig::default() };
        let got = splitstep_final(&u, &cfg, &p, &dft, steps as f64 * cfg.dt).unwrap();
        prop_assert!(sobolev_norm(&got, 0.0, &g) <= m0 * (1.0 + 1e-12));
    }

    #[test]
    fn damping_coupling_never_increases_mass(u in spectrum(), im in -2.0..-0.01f64, steps in 1usize..20) {
        let g = grid();
        let dft = Transform::new(&g);
        let p = Phase::new(0.0, 1.0, Complex::new(1.0, im)).unwrap();
        let cfg = SolveConfig { dt: 0.05, ..SolveConfig::default() };
        let got = splitstep_final(&u, &cfg, &p, &dft, steps as f64 * cfg.dt).unwrap();
        prop_assert!(sobolev_norm(&got, 0.0, &g) <= sobolev_norm(&u, 0.0, &g) * (1.0 + 1e-12));
    }

    #[test]
    fn plotdata_round_trips(points in prop::collection::vec((any::<f64>(), any::<f64>()), 1..50), tag in "[a-z]{1,8}") {
        let points: Vec<(f64, f64)> = points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        prop_assume!(!points.is_empty());
        let s = Series::new("series", points).with("tag", tag);
        prop_assert_eq!(parse_plotdata(&s.render().unwrap()).unwrap(), s);
    }

    #[test]
    fn xsbt_round_trips_at_single_precision(rows in prop::collection::vec(prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 8), 1..10)) {
        let rows: Vec<Vec<Complex<f64>>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|(a, b)| Complex::new(a, b)).collect())
            .collect();
        let mut bytes = Vec::new();
        write_xsbt(&mut bytes, 8, &rows).unwrap();
        let dump = read_xsbt(bytes.as_slice()).unwrap();
        prop_assert_eq!((dump.nx, dump.nt), (8, rows.len()));
        for (got, want) in dump.values.iter().zip(rows.iter().flatten()) {
            prop_assert_eq!(*got, Complex::new(want.re as f32, want.im as f32));
        }
    }

    #[test]
    fn power_laws_fit_exactly(slope in -3.0..3.0f64, scale in 0.01..100.0f64, n0 in 1.0..100.0f64) {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| {
            let n = n0 * 2f64.powi(k);
            (n, scale * n.powf(slope))
        }).collect();
        let fit = fit_scaling_exponent(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!((fit.intercept - scale.ln()).abs() <= 1e-9);
    }
}

#[test]
fn default_configs_round_trip_through_toml_and_validate() {
    for (name, _) in xsb_lab::harness::catalog() {
        let cfg = ExperimentConfig {
            experiment: Experiment::default_for(name).unwrap(),
            seed: 9,
            output_dir: "out".into(),
            phase: Default::default(),
        };
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{name}");
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg, "{name}");
    }
}

#[test]
fn shipped_experiment_files_parse_and_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}
