use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::*;
use super::plotdata::Series;
use super::report::ReportBundle;
use crate::counterexample::{bump_xsb_norm, fit_scaling_exponent, ConvolutionMode, Counterexample, Resolution};
use crate::dynamics::{
    continuous_dependence_probe, existence_time_probe, picard_iterate, random_unit_direction,
    splitstep_evolve, splitstep_final, SolveConfig,
};
use crate::error::Result;
use crate::estimates::{
    bump_family_ratios, check_el1, check_el2, check_el3, check_el4, dichotomy_i00, trilinear_ratio_search,
    uniform_bound_scan, BoundReport, Regime, ResonanceIntegrand, SampleGrid,
};
use crate::quadrature::QuadSpec;
use crate::spectral::{sobolev_norm, Dft, PhaseParams, SpaceTimeGrid, SpatialSpectrum};

/// Seed of task `index` derived from the run seed.
pub(crate) fn task_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

fn with_seed(res: &Resolution, seed: u64) -> Resolution {
    let mode = match res.mode {
        ConvolutionMode::MonteCarlo { strata, .. } => ConvolutionMode::MonteCarlo { strata, seed },
        m => m,
    };
    Resolution { mode, ..*res }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

pub(crate) fn counterexample(p: &CounterexampleParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) {
    let rows: Vec<_> = p
        .ns
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let res = with_seed(&p.resolution, task_seed(seed, i as u64));
            Counterexample::build(n, &res, params).map(|c| (bump_xsb_norm(&c.bump, p.s, p.b), c.ratio(p.s, p.b)))
        })
        .collect();
    let mut csv = String::from("n,norm,num,den,ratio,mass_defect,undersampled\n");
    let mut norms = Vec::new();
    let mut ratios = Vec::new();
    for (&n, row) in p.ns.iter().zip(rows) {
        match row {
            Ok((norm, r)) => {
                csv.push_str(&format!(
                    "{n},{norm:e},{:e},{:e},{:e},{:e},{}\n",
                    r.num, r.den, r.ratio, r.mass_defect, r.undersampled
                ));
                norms.push((n, norm));
                ratios.push((n, r.ratio));
                if r.undersampled {
                    out.fail(format!("N = {n}: convolution peak undersampled"));
                }
            }
            Err(e) => out.fail(format!("N = {n}: {e}")),
        }
    }
    out.tables.insert("counterexample".into(), csv);
    let expect_norm = p.s - 0.25;
    let expect_ratio = -2.0 * p.s - 0.5;
    out.put("expected_slope_norm", expect_norm);
    out.put("expected_slope_ratio", expect_ratio);
    match (fit_scaling_exponent(&norms), fit_scaling_exponent(&ratios)) {
        (Ok(fn_), Ok(fr)) => {
            out.put("slope_norm", fn_.slope);
            out.put("slope_ratio", fr.slope);
            out.put("stderr_ratio", fr.stderr);
            out.verdict(
                "norm_slope",
                (fn_.slope - expect_norm).abs() <= 0.05,
                format!("fitted {:.4} vs s − 1/4 = {expect_norm:.4} (±0.05)", fn_.slope),
            );
            out.verdict(
                "ratio_slope",
                (fr.slope - expect_ratio).abs() <= 0.1,
                format!("fitted {:.4} vs −2s − 1/2 = {expect_ratio:.4} (±0.1)", fr.slope),
            );
            let (sign_ok, rule) = if p.s < -0.25 - 1e-12 {
                (fr.slope > 0.0, "positive below s = −1/4")
            } else if p.s > -0.25 + 1e-12 {
                (fr.slope < 0.0, "negative above s = −1/4")
            } else {
                (fr.slope.abs() <= 0.1, "zero within 0.1 at s = −1/4")
            };
            out.verdict("ratio_slope_sign", sign_ok, format!("slope {:.4}, expected {rule}", fr.slope));
        }
        (a, b) => {
            let e = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
            out.fail(format!("scaling fit: {e}"));
        }
    }
    out.plotdata.push(
        Series::new("norm", norms)
            .with("x", "N")
            .with("y", "bump X^{s,b} norm")
            .with("s", p.s)
            .with("b", p.b),
    );
    out.plotdata.push(
        Series::new("ratio", ratios)
            .with("x", "N")
            .with("y", "counterexample ratio")
            .with("s", p.s)
            .with("b", p.b),
    );
}

pub(crate) fn lemmas(p: &LemmaParams, out: &mut ReportBundle) {
    let q = &p.quad;
    let mut csv = String::from("check,parameter,value,ratio,error\n");
    let mut ladders: Vec<(&str, Vec<f64>)> = Vec::new();
    type Check<'a> = Box<dyn Fn(f64) -> Result<(f64, f64, f64)> + Sync + 'a>;
    let checks: Vec<(&str, Check)> = vec![
        ("el1", Box::new(|a| check_el1(0.0, a, p.b, q).map(|r| (r.integral, r.ratio, r.error)))),
        ("el2", Box::new(|a| check_el2(0.0, a, p.c1, p.c2, q).map(|r| (r.integral, r.ratio, r.error)))),
        (
            "el3_half",
            Box::new(|a| check_el3(a, 0.5, 1.0, &SampleGrid::default()).map(|r| (r.sup, r.sup, r.refined_sup - r.sup))),
        ),
        ("el4_eta", Box::new(|e| check_el4(1.0, e, p.b, q).map(|r| (r.integral, r.ratio, r.error)))),
        ("el4_a", Box::new(|a| check_el4(a, 1.0, p.b, q).map(|r| (r.integral, r.ratio, r.error)))),
    ];
    for (name, f) in &checks {
        let mut ratios = Vec::new();
        for &a in &p.ladder {
            match f(a) {
                Ok((v, r, e)) => {
                    csv.push_str(&format!("{name},{a},{v:e},{r:e},{e:e}\n"));
                    ratios.push(r);
                }
                Err(e) => out.fail(format!("{name} at {a}: {e}")),
            }
        }
        ladders.push((name, ratios));
    }
    let mut unit = Vec::new();
    for &a in &p.ladder {
        match check_el3(a, 1.0, 1.0, &SampleGrid::default()) {
            Ok(r) => {
                csv.push_str(&format!("el3_unit,{a},{:e},{:e},{:e}\n", r.sup, r.sup, r.refined_sup - r.sup));
                unit.push(r.sup);
            }
            Err(e) => out.fail(format!("el3_unit at {a}: {e}")),
        }
    }
    out.tables.insert("lemmas".into(), csv);
    let mut spreads = serde_json::Map::new();
    for (name, ratios) in &ladders {
        if ratios.len() < 2 {
            continue;
        }
        let s = spread(ratios);
        spreads.insert(name.to_string(), json!(s));
        out.verdict(
            &format!("{name}_uniform"),
            s <= p.spread_limit,
            format!("max/min ratio {s:.3} over the ladder (limit {})", p.spread_limit),
        );
        out.plotdata.push(
            Series::new(*name, p.ladder.iter().copied().zip(ratios.iter().copied()).collect())
                .with("x", "scale")
                .with("y", "normalised ratio"),
        );
    }
    out.put("spreads", spreads);
    let worst = unit.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    out.put("el3_unit_max_deviation", worst);
    out.verdict(
        "el3_unit_sup",
        !unit.is_empty() && worst <= 0.01,
        format!("sup |ax|/<ax> deviates from 1 by at most {worst:.2e} (limit 1%)"),
    );
}

/// Inserts geometric midpoints between positive neighbours and arithmetic
/// midpoints elsewhere.
fn refine(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for w in v.windows(2) {
        out.push(w[0]);
        let same_sign = w[0] * w[1] > 0.0;
        out.push(if same_sign {
            w[0].signum() * (w[0] * w[1]).sqrt()
        } else {
            (w[0] + w[1]) / 2.0
        });
    }
    out.extend(v.last());
    out
}

fn bound_csv(r: &BoundReport) -> String {
    let mut csv = String::from("xi,z,y,value,tail_slope,error\n");
    for p in &r.points {
        csv.push_str(&format!(
            "{},{},{:e},{},{},{}\n",
            p.xi,
            p.z,
            p.y,
            fmt_opt(p.value),
            fmt_opt(p.tail_slope),
            p.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }
    csv
}

pub(crate) fn uniform_bound(p: &UniformBoundParams, params: &PhaseParams<f64>, out: &mut ReportBundle) {
    let ri = match ResonanceIntegrand::new(p.rho, p.b, *params) {
        Ok(ri) => ri,
        Err(e) => return out.fail(e.to_string()),
    };
    let coarse = uniform_bound_scan(&ri, &p.xi, &p.z, &p.quad);
    out.tables.insert("bound".into(), bound_csv(&coarse));
    for pt in coarse.points.iter().filter(|pt| pt.value.is_none()) {
        out.fail(format!(
            "I(ξ = {}, z = {}): {}",
            pt.xi,
            pt.z,
            pt.error.as_deref().unwrap_or("no value")
        ));
    }
    out.put("sup", coarse.sup);
    out.put("argmax", coarse.argmax);
    out.plotdata.push(
        Series::new(
            "bound_y0",
            coarse
                .points
                .iter()
                .filter(|pt| pt.z == 0.0)
                .filter_map(|pt| pt.value.map(|v| (pt.xi, v)))
                .collect(),
        )
        .with("x", "xi")
        .with("y", "I(xi, 0)")
        .with("rho", p.rho)
        .with("b", p.b),
    );
    if p.refine {
        let quad = QuadSpec {
            truncation_radius: 2.0 * p.quad.truncation_radius,
            ..p.quad
        };
        let fine = uniform_bound_scan(&ri, &refine(&p.xi), &refine(&p.z), &quad);
        out.tables.insert("bound_refined".into(), bound_csv(&fine));
        for pt in fine.points.iter().filter(|pt| pt.value.is_none()) {
            out.fail(format!("refined I(ξ = {}, z = {}): {}", pt.xi, pt.z, pt.error.as_deref().unwrap_or("no value")));
        }
        let change = (fine.sup - coarse.sup).abs() / coarse.sup;
        out.put("sup_refined", fine.sup);
        out.put("sup_relative_change", change);
        out.verdict(
            "sup_stable",
            change < 0.1,
            format!("sup {:.5} → {:.5} under ×2 grid and ×2 truncation (change {change:.2e}, limit 10%)", coarse.sup, fine.sup),
        );
    }
    if let Some(cb) = p.control_b {
        match ResonanceIntegrand::new(p.rho, cb, *params) {
            Ok(ctl) => {
                let r = uniform_bound_scan(&ctl, &p.xi, &p.z, &p.quad);
                out.tables.insert("bound_control".into(), bound_csv(&r));
                out.put("control_b", cb);
                out.put("control_diverging_points", r.diverging);
                let expect_unbounded = cb <= p.rho + 1.0 / 3.0;
                out.verdict(
                    "control",
                    r.unbounded() == expect_unbounded,
                    format!(
                        "b = {cb}: {} of {} points with non-decaying tails (expected {})",
                        r.diverging,
                        r.points.len(),
                        if expect_unbounded { "unbounded" } else { "bounded" }
                    ),
                );
            }
            Err(e) => out.fail(format!("control: {e}")),
        }
    }
    if !p.lattice_rho.is_empty() && !p.lattice_b.is_empty() {
        let cells: Vec<(f64, f64)> = p
            .lattice_rho
            .iter()
            .flat_map(|&r| p.lattice_b.iter().map(move |&b| (r, b)))
            .collect();
        let verdicts: Vec<_> = cells
            .par_iter()
            .map(|&(r, b)| dichotomy_i00(r, b, &p.radii, &p.quad))
            .collect();
        let mut csv = String::from("rho,b,regime,tail_slope,expected\n");
        let (mut graded, mut matched) = (0, 0);
        for (&(r, b), v) in cells.iter().zip(verdicts) {
            let gap = b - r - 1.0 / 3.0;
            let expected = if gap > 0.0 { Regime::Convergent } else { Regime::Divergent };
            match v {
                Ok(v) => {
                    csv.push_str(&format!("{r},{b},{:?},{:.4},{expected:?}\n", v.regime, v.tail_slope));
                    if gap.abs() >= 0.05 {
                        graded += 1;
                        matched += usize::from(v.regime == expected);
                    }
                }
                Err(e) => out.fail(format!("dichotomy at (ρ, b) = ({r}, {b}): {e}")),
            }
        }
        out.tables.insert("dichotomy".into(), csv);
        out.put("dichotomy_matched", matched);
        out.put("dichotomy_graded", graded);
        out.verdict(
            "dichotomy",
            matched == graded,
            format!("{matched}/{graded} cells at least 0.05 from b = ρ + 1/3 classified correctly"),
        );
    }
}

pub(crate) fn trilinear(p: &TrilinearParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) {
    let grid = match p.grid.grid() {
        Ok(g) => g,
        Err(e) => return out.fail(e.to_string()),
    };
    match trilinear_ratio_search(p.s, p.b, 2 * p.ensemble, &grid, params, seed) {
        Ok(r) => {
            let half = r.prefix_max(p.ensemble);
            let growth = r.max_ratio / half;
            let mut csv = String::from("index,ratio\n");
            for (i, x) in r.ratios.iter().enumerate() {
                csv.push_str(&format!("{i},{x:e}\n"));
            }
            out.tables.insert("ensemble".into(), csv);
            out.put("max_ratio_half", half);
            out.put("max_ratio", r.max_ratio);
            out.put("ensemble_growth", growth);
            out.put("witness", r.witness);
            if p.s > -0.25 {
                out.verdict(
                    "ensemble_stable",
                    growth < p.bounded_growth,
                    format!("max {half:.4e} over {} → {:.4e} over {} (growth {growth:.3}, limit {})", p.ensemble, r.max_ratio, 2 * p.ensemble, p.bounded_growth),
                );
            }
        }
        Err(e) => out.fail(format!("ensemble search: {e}")),
    }
    let res = with_seed(&p.resolution, task_seed(seed, u64::MAX));
    match bump_family_ratios(p.s, p.b, &p.bump_ns, &res, params) {
        Ok(rows) => {
            let mut csv = String::from("n,ratio\n");
            for r in &rows {
                csv.push_str(&format!("{},{:e}\n", r.n, r.ratio));
            }
            out.tables.insert("bump_family".into(), csv);
            let growth = rows[rows.len() - 1].ratio / rows[0].ratio;
            out.put("bump_growth", growth);
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n, r.ratio)).collect();
            out.plotdata.push(Series::new("bump_family", pts).with("x", "N").with("s", p.s).with("b", p.b));
            let (lo, hi) = (p.bump_ns[0], p.bump_ns[p.bump_ns.len() - 1]);
            if p.s > -0.25 {
                out.verdict(
                    "bump_family_bounded",
                    growth < p.bounded_growth,
                    format!("ratio grows by {growth:.3} from N = {lo} to {hi} (limit {})", p.bounded_growth),
                );
            } else {
                out.verdict(
                    "bump_family_grows",
                    growth > p.unbounded_growth,
                    format!("ratio grows by {growth:.3} from N = {lo} to {hi} (required > {})", p.unbounded_growth),
                );
            }
        }
        Err(e) => out.fail(format!("bump family: {e}")),
    }
}

/// Initial datum on the grid of `dft`.
pub fn initial_data(d: &DataConfig, dft: &Dft<f64>, seed: u64) -> Result<SpatialSpectrum<f64>> {
    let grid = *dft.grid();
    let u = match d.kind {
        DataKind::Gaussian => {
            let samples: Vec<Complex<f64>> = grid
                .x_nodes()
                .iter()
                .map(|&x| Complex::from_polar(d.amplitude * (-(x / d.width).powi(2) / 2.0).exp(), d.carrier * x))
                .collect();
            dft.spectrum(&samples)?
        }
        DataKind::Random => random_unit_direction(&grid, 0.0, d.band, seed).scaled(d.amplitude),
    };
    Ok(match d.l2_norm {
        Some(n) => u.scaled(n / sobolev_norm(&u, 0.0, &grid)),
        None => u,
    })
}

fn setup(g: &GridConfig) -> Result<(SpaceTimeGrid<f64>, Dft<f64>)> {
    let grid = g.grid()?;
    let dft = Dft::new(&grid);
    Ok((grid, dft))
}

pub(crate) fn evolve(p: &EvolveParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) -> Result<()> {
    let (_, dft) = setup(&p.grid)?;
    let u0 = initial_data(&p.data, &dft, seed)?;
    let traj = match splitstep_evolve(&u0, &p.solver.solve(), params, &dft, p.t_final) {
        Ok(t) => t,
        Err(e) => {
            out.fail(format!("split-step: {e}"));
            return Ok(());
        }
    };
    out.tables.insert("trajectory".into(), traj.to_csv(p.s));
    if p.dump {
        let mut bytes = Vec::new();
        traj.write_xsbt(&mut bytes)?;
        out.files.insert("trajectory.xsbt".into(), bytes);
    }
    let drift = traj.l2_drift()?;
    let fin = traj.final_state();
    out.put("steps", traj.times.len() - 1);
    out.put("final_l2", sobolev_norm(fin, 0.0, &traj.grid));
    out.put("final_hs", sobolev_norm(fin, p.s, &traj.grid));
    out.put("max_l2_drift", drift);
    if params.gamma_is_real() {
        let limit = p.drift_limit * p.t_final.max(1.0);
        out.verdict("l2_conserved", drift < limit, format!("relative L² drift {drift:.3e} (limit {limit:.1e})"));
    } else {
        out.put("conservation_skipped", "γ is complex, so the L² norm is not conserved");
    }
    out.plotdata.push(
        Series::new(
            "l2",
            traj.times
                .iter()
                .zip(&traj.states)
                .map(|(t, u)| (*t, sobolev_norm(u, 0.0, &traj.grid)))
                .collect(),
        )
        .with("x", "t")
        .with("y", "L2 norm"),
    );
    Ok(())
}

pub(crate) fn picard(p: &PicardParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) -> Result<()> {
    let (grid, dft) = setup(&p.grid)?;
    let u0 = initial_data(&p.data, &dft, seed)?;
    let cfg = p.solver.solve();
    match picard_iterate(&u0, &cfg, params, &dft, p.t_final, p.s) {
        Ok(o) => {
            let ratios = o.ratios();
            let mut csv = String::from("iteration,residual,ratio\n");
            for (k, r) in o.residuals.iter().enumerate() {
                let q = if k == 0 { String::new() } else { format!("{:e}", ratios[k - 1]) };
                csv.push_str(&format!("{},{r:e},{q}\n", k + 1));
            }
            out.tables.insert("residuals".into(), csv);
            out.put("residuals", &o.residuals);
            out.put("converged", o.converged);
            // Ratios once the residual sits at the rounding floor are noise.
            let floor = 1e3 * f64::EPSILON * sobolev_norm(&u0, p.s, &grid);
            let graded: Vec<f64> = o
                .residuals
                .windows(2)
                .filter(|w| w[1] > floor)
                .map(|w| w[1] / w[0])
                .collect();
            let worst = graded.iter().copied().fold(0.0, f64::max);
            out.put("max_residual_ratio", worst);
            out.verdict(
                "picard_geometric",
                o.converged && worst < p.ratio_limit,
                format!("largest successive residual ratio {worst:.3e} (limit {}), converged: {}", p.ratio_limit, o.converged),
            );
            match splitstep_evolve(&u0, &cfg, params, &dft, p.t_final) {
                Ok(ss) => {
                    let d = o.trajectory.sup_distance(&ss, 0.0);
                    out.put("sup_l2_difference", d);
                    out.verdict(
                        "solvers_agree",
                        d < p.agreement_limit,
                        format!("sup_t ‖Picard − split-step‖_L² = {d:.3e} (limit {:.1e})", p.agreement_limit),
                    );
                }
                Err(e) => out.fail(format!("split-step: {e}")),
            }
        }
        Err(e) => out.fail(format!("Picard: {e}")),
    }
    if p.order_dts.len() >= 3 {
        let mut dts = p.order_dts.clone();
        dts.sort_by(f64::total_cmp);
        let reference = splitstep_final(&u0, &SolveConfig { dt: dts[0] / 16.0, ..cfg }, params, &dft, p.t_final);
        match reference {
            Ok(reference) => {
                let errs: Result<Vec<(f64, f64)>> = dts
                    .par_iter()
                    .map(|&dt| {
                        let u = splitstep_final(&u0, &SolveConfig { dt, ..cfg }, params, &dft, p.t_final)?;
                        Ok((dt, sobolev_norm(&u.sub(&reference), 0.0, &grid)))
                    })
                    .collect();
                match errs.and_then(|e| fit_scaling_exponent(&e)) {
                    Ok(fit) => {
                        let mut csv = String::from("dt,error\n");
                        for (dt, e) in &fit.points {
                            csv.push_str(&format!("{dt},{e:e}\n"));
                        }
                        out.tables.insert("order".into(), csv);
                        out.put("order", fit.slope);
                        out.verdict(
                            "second_order",
                            (fit.slope - 2.0).abs() <= 0.1,
                            format!("self-convergence order {:.3} (expected 2 ± 0.1)", fit.slope),
                        );
                    }
                    Err(e) => out.fail(format!("order study: {e}")),
                }
            }
            Err(e) => out.fail(format!("order reference: {e}")),
        }
    }
    Ok(())
}

pub(crate) fn dependence(p: &DependenceParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) -> Result<()> {
    let (grid, dft) = setup(&p.grid)?;
    let u0 = initial_data(&p.data, &dft, task_seed(seed, 0))?;
    let dir = random_unit_direction(&grid, p.s, p.direction_band, task_seed(seed, 1));
    match continuous_dependence_probe(&u0, &dir, &p.deltas, p.s, &p.solver.solve(), params, &dft, p.t_final) {
        Ok(points) if !points.is_empty() => {
            let mut csv = String::from("delta,ratio\n");
            for q in &points {
                csv.push_str(&format!("{:e},{:e}\n", q.delta, q.ratio));
            }
            out.tables.insert("dependence".into(), csv);
            let ratios: Vec<f64> = points.iter().map(|q| q.ratio).collect();
            let sp = spread(&ratios);
            let step = points
                .windows(2)
                .map(|w| (w[1].ratio / w[0].ratio - 1.0).abs())
                .fold(0.0, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            out.put("ratios", &ratios);
            out.put("spread", sp);
            out.put("max_adjacent_change", step);
            out.verdict("lower_band", min >= 0.5, format!("smallest ratio {min:.4} (required ≥ 1/2)"));
            out.verdict("delta_independent", sp <= 1.2, format!("max/min ratio {sp:.4} (limit 1.2)"));
            out.verdict("stabilised", step < 0.1, format!("largest change between adjacent δ {step:.3e} (limit 10%)"));
            out.plotdata.push(
                Series::new("dependence", points.iter().map(|q| (q.delta, q.ratio)).collect())
                    .with("x", "delta")
                    .with("y", "Lipschitz ratio"),
            );
        }
        Ok(_) => out.fail("no nonzero δ in the ladder"),
        Err(e) => out.fail(format!("probe: {e}")),
    }
    Ok(())
}

pub(crate) fn existence(p: &ExistenceParams, seed: u64, params: &PhaseParams<f64>, out: &mut ReportBundle) -> Result<()> {
    let (grid, dft) = setup(&p.grid)?;
    let shape = initial_data(&p.data, &dft, seed)?;
    let shape = shape.scaled(1.0 / sobolev_norm(&shape, p.s, &grid));
    let r = existence_time_probe(
        &shape,
        &p.lambdas,
        p.s,
        p.b,
        p.b_prime,
        p.c_measured,
        &p.solver.solve(),
        params,
        &dft,
        p.steps,
        p.bisections,
    )?;
    let mut csv = String::from("lambda,t_observed,censored,floor,exhausted\n");
    for s in &r.samples {
        csv.push_str(&format!("{},{:e},{},{:e},{}\n", s.lambda, s.t_observed, s.censored, s.floor, s.exhausted));
        if s.exhausted {
            out.fail(format!("λ = {}: no converging T found", s.lambda));
        }
    }
    out.tables.insert("existence".into(), csv);
    let times: Vec<f64> = r.samples.iter().map(|s| s.t_observed).collect();
    out.put("samples", &r.samples);
    out.put("theory_slope", r.theory_slope);
    out.put("observed_slope", r.fit.as_ref().map(|f| f.slope));
    out.put(
        "slope_comparison",
        format!(
            "observed {} vs −2/ε = {:.3}",
            r.fit.as_ref().map(|f| format!("{:.3}", f.slope)).unwrap_or_else(|| "n/a".into()),
            r.theory_slope
        ),
    );
    out.verdict(
        "monotone",
        times.windows(2).all(|w| w[1] <= w[0]),
        format!("observed times {times:?} nonincreasing in λ"),
    );
    out.verdict(
        "above_floor",
        r.samples.iter().all(|s| s.exhausted || s.t_observed >= s.floor),
        "every observed time is at least the certified contraction time",
    );
    if let Some(fit) = &r.fit {
        out.verdict("slope_nonpositive", fit.slope <= 0.0, format!("fitted slope {:.3}", fit.slope));
    }
    out.plotdata.push(
        Series::new("existence_time", r.samples.iter().map(|s| (s.lambda, s.t_observed)).collect())
            .with("x", "lambda")
            .with("y", "T_observed"),
    );
    Ok(())
}
