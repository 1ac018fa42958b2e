//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Expected values are recomputed here from closed forms (exponents,
//! thresholds, the time-window norm) rather than read back from the library.
//! Criteria listed in `EXPECTED_RED` are known to be unattainable as stated;
//! they are still run and printed as FAIL, but do not fail the target.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use xsb_lab::counterexample::{bump_xsb_norm, Counterexample, Resolution};
use xsb_lab::dynamics::{
    duhamel_apply, picard_iterate, random_unit_direction, splitstep_evolve, splitstep_final, SolveConfig,
};
use xsb_lab::estimates::{
    bump_family_ratios, check_el1, check_el2, check_el3, check_el4, dichotomy_i00, trilinear_ratio_search,
    uniform_bound_scan, Regime, SampleGrid,
};
use xsb_lab::quadrature::{log_space, QuadSpec};
use xsb_lab::spectral::{l2_norm_samples, sobolev_norm, SpaceTimeField};
use xsb_lab::xsb::{linear_estimate_ratio, psi, XsbIndex};
use xsb_lab::{Grid, Phase, Resonance, Transform};

/// Criterion 6 asks for bump-family growth > 2 at s = −0.4 over N = 64 → 512.
/// The ratio scales as N^{−2s−1/2} = N^{0.3}, so the exact growth is
/// 8^{0.3} ≈ 1.866 and the clause cannot hold.
const EXPECTED_RED: &[u32] = &[6];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn cubic() -> Phase {
    Phase::cubic(Complex::new(1.0, 0.0))
}

const NS: [f64; 5] = [64.0, 128.0, 256.0, 512.0, 1024.0];
const SCALING_S: [f64; 3] = [-0.5, -0.25, 0.0];

fn counterexamples() -> Vec<Counterexample<f64>> {
    NS.par_iter()
        .map(|&n| Counterexample::build(n, &Resolution::default(), &cubic()).unwrap())
        .collect()
}

fn criterion_1() -> Outcome {
    let family = counterexamples();
    let mut parts = Vec::new();
    let mut ok = true;
    for s in SCALING_S {
        let pts: Vec<(f64, f64)> = family.iter().map(|c| (c.bump.n, bump_xsb_norm(&c.bump, s, 0.75))).collect();
        let slope = loglog_slope(&pts);
        let expected = s - 0.25;
        ok &= (slope - expected).abs() <= 0.05;
        parts.push(format!("s={s}: {slope:.4} vs {expected}"));
    }
    outcome(ok, format!("norm slopes {}", parts.join(", ")))
}

fn criterion_2() -> Outcome {
    let family = counterexamples();
    let mut parts = Vec::new();
    let mut ok = true;
    for s in SCALING_S {
        let pts: Vec<(f64, f64)> = family.iter().map(|c| (c.bump.n, c.ratio(s, 0.75).ratio)).collect();
        let slope = loglog_slope(&pts);
        let expected = -2.0 * s - 0.5;
        let sign = if s < -0.25 {
            slope > 0.0
        } else if s > -0.25 {
            slope < 0.0
        } else {
            slope.abs() <= 0.1
        };
        ok &= (slope - expected).abs() <= 0.1 && sign;
        parts.push(format!("s={s}: {slope:.4} vs {expected}"));
    }
    outcome(ok, format!("ratio slopes {}", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let q = QuadSpec::default();
    let ladder = log_space(1.0, 100.0, 4);
    let b = 0.75;
    let el1: Vec<f64> = ladder.iter().map(|&a| check_el1(0.0, a, b, &q).unwrap().ratio).collect();
    let el2: Vec<f64> = ladder.iter().map(|&a| check_el2(0.0, a, 0.6, 0.6, &q).unwrap().ratio).collect();
    let el3: Vec<f64> = ladder
        .iter()
        .map(|&a| check_el3(a, 0.5, 1.0, &SampleGrid::default()).unwrap().sup)
        .collect();
    let el4: Vec<f64> = ladder.iter().map(|&a| check_el4(a, 1.0, b, &q).unwrap().ratio).collect();
    let spreads = [spread(&el1), spread(&el2), spread(&el3), spread(&el4)];
    // sup_x |x|/(1 + |x|) = 1, approached as x → ∞.
    let unit = check_el3(10.0, 1.0, 1.0, &SampleGrid::default()).unwrap().sup;
    let ok = spreads.iter().all(|s| *s <= 8.0) && (unit - 1.0).abs() <= 0.01;
    outcome(
        ok,
        format!(
            "max/min over a ∈ [1, 100]: el1 {:.3}, el2 {:.3}, el3 {:.3}, el4 {:.3}; unit sup {unit:.6}",
            spreads[0], spreads[1], spreads[2], spreads[3]
        ),
    )
}

fn criterion_4() -> Outcome {
    let rhos = [0.0, 0.05, 0.1, 0.15, 0.2];
    let bs = [0.2, 0.25, 0.6, 0.65, 0.7];
    let radii: Vec<f64> = (0..7).map(|k| 16.0 * 2f64.powi(k)).collect();
    let cells: Vec<(f64, f64)> = rhos.iter().flat_map(|&r| bs.iter().map(move |&b| (r, b))).collect();
    let mut matched = 0;
    let mut graded = 0;
    let mut wrong = Vec::new();
    let verdicts: Vec<_> = cells
        .par_iter()
        .map(|&(r, b)| dichotomy_i00(r, b, &radii, &QuadSpec::default()).unwrap())
        .collect();
    for (&(r, b), v) in cells.iter().zip(&verdicts) {
        let gap = b - r - 1.0 / 3.0;
        assert!(gap.abs() >= 0.05);
        graded += 1;
        let expected = if gap > 0.0 { Regime::Convergent } else { Regime::Divergent };
        if v.regime == expected {
            matched += 1;
        } else {
            wrong.push(format!("({r}, {b}) → {:?}", v.regime));
        }
    }
    outcome(matched == 25 && graded == 25, format!("{matched}/{graded} cells match sign(b − ρ − 1/3) {wrong:?}"))
}

fn refine(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in v.windows(2) {
        out.push(w[0]);
        out.push(if w[0] * w[1] > 0.0 {
            w[0].signum() * (w[0] * w[1]).sqrt()
        } else {
            (w[0] + w[1]) / 2.0
        });
    }
    out.extend(v.last());
    out
}

fn criterion_5() -> Outcome {
    let mut xi = vec![0.0];
    xi.extend(log_space(0.1, 100.0, 2));
    let z = [-1.0, -0.1, -0.01, 0.0, 0.01, 0.1, 1.0];
    let q = QuadSpec::default();
    let ri = Resonance::new(0.2, 0.7, cubic()).unwrap();
    let coarse = uniform_bound_scan(&ri, &xi, &z, &q);
    let fine_q = QuadSpec {
        truncation_radius: 2.0 * q.truncation_radius,
        ..q
    };
    let fine = uniform_bound_scan(&ri, &refine(&xi), &refine(&z), &fine_q);
    let missing = coarse.points.iter().chain(&fine.points).filter(|p| p.value.is_none()).count();
    let change = (fine.sup - coarse.sup).abs() / coarse.sup;
    let control = uniform_bound_scan(&Resonance::new(0.2, 0.5, cubic()).unwrap(), &xi, &z, &q);
    let ok = missing == 0 && change < 0.1 && control.unbounded();
    outcome(
        ok,
        format!(
            "sup {:.4} → {:.4} (change {change:.2e}), {missing} failed points; control b=0.5: {}/{} non-decaying tails",
            coarse.sup,
            fine.sup,
            control.diverging,
            control.points.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let pi = std::f64::consts::PI;
    let grid = Grid::new(16.0 * pi, 64, 32.0 * pi, 512).unwrap();
    let search = trilinear_ratio_search(-0.2, 0.75, 2000, &grid, &cubic(), 11).unwrap();
    let ensemble_growth = search.max_ratio / search.prefix_max(1000);
    let ns = [64.0, 128.0, 256.0, 512.0];
    let res = Resolution::default();
    let growth = |s: f64| {
        let r = bump_family_ratios(s, 0.75, &ns, &res, &cubic()).unwrap();
        r[3].ratio / r[0].ratio
    };
    let bounded = growth(-0.2);
    let unbounded = growth(-0.4);
    outcome(
        ensemble_growth < 1.5 && bounded < 1.5 && unbounded > 2.0,
        format!(
            "s=-0.2: ensemble growth {ensemble_growth:.3}, bump growth {bounded:.3} (< 1.5); \
             s=-0.4: bump growth {unbounded:.3} (> 2 required; N^0.3 gives {:.3})",
            8f64.powf(0.3)
        ),
    )
}

fn gaussian(dft: &Transform, amp: f64, width: f64, k0: f64) -> xsb_lab::Spectrum {
    let x = dft.grid().x_nodes();
    let s: Vec<Complex<f64>> = x
        .iter()
        .map(|&x| Complex::from_polar(amp * (-(x / width).powi(2) / 2.0).exp(), k0 * x))
        .collect();
    dft.spectrum(&s).unwrap()
}

fn criterion_7() -> Outcome {
    let grid = Grid::new(100.0, 512, 4.0, 64).unwrap();
    let dft = Transform::new(&grid);
    let params = Phase::new(0.5, 1.0, Complex::new(1.0, 0.0)).unwrap();
    let u0 = gaussian(&dft, 1.0, 1.5, 0.7);
    let cfg = SolveConfig {
        dt: 1e-3,
        ..SolveConfig::default()
    };
    let traj = splitstep_evolve(&u0, &cfg, &params, &dft, 1.0).unwrap();
    // Mass measured on physical samples, independent of the spectral norm.
    let mass = |u: &xsb_lab::Spectrum| l2_norm_samples(&dft.samples(u).unwrap(), &grid);
    let m0 = mass(&u0);
    let drift = traj.states.iter().map(|u| (mass(u) - m0).abs() / m0).fold(0.0, f64::max);
    outcome(drift < 1e-10, format!("max relative L² drift {drift:.3e} over {} steps", traj.states.len() - 1))
}

fn criterion_8() -> Outcome {
    let grid = Grid::new(50.0, 256, 8.0, 64).unwrap();
    let dft = Transform::new(&grid);
    let params = cubic();
    let u0 = gaussian(&dft, 1.0, 1.5, 0.7);
    let u0 = u0.scaled(0.1 / sobolev_norm(&u0, 0.0, &grid));
    let t = 0.5;
    let dts = [0.05, 0.025, 0.0125, 0.00625];
    let run = |dt: f64| splitstep_final(&u0, &SolveConfig { dt, ..SolveConfig::default() }, &params, &dft, t).unwrap();
    let reference = run(dts[3] / 16.0);
    let errs: Vec<f64> = dts.iter().map(|&dt| sobolev_norm(&run(dt).sub(&reference), 0.0, &grid)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.1);

    let cfg = SolveConfig::default();
    let pic = picard_iterate(&u0, &cfg, &params, &dft, t, 0.0).unwrap();
    let floor = 1e3 * f64::EPSILON * 0.1;
    let ratios: Vec<f64> = pic
        .residuals
        .windows(2)
        .filter(|w| w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    let geometric = pic.converged && ratios.iter().all(|r| *r < 0.5);
    let ss = splitstep_evolve(&u0, &cfg, &params, &dft, t).unwrap();
    let agree = pic
        .trajectory
        .states
        .iter()
        .zip(&ss.states)
        .map(|(a, b)| sobolev_norm(&a.sub(b), 0.0, &grid))
        .fold(0.0, f64::max);
    outcome(
        order_ok && geometric && agree < 1e-6,
        format!(
            "orders {:?}; Picard ratios max {:.2e} over {} graded iterations; sup_t L² difference {agree:.2e}",
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>(),
            ratios.iter().copied().fold(0.0, f64::max),
            ratios.len()
        ),
    )
}

/// Smooth forcing `F(x, t) = e^{−t²/2} cos(ωt) v(x)` with random `ω` and
/// band-limited random `v`.
fn smooth_forcing(grid: &Grid, dft: &Transform, seed: u64) -> SpaceTimeField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: f64 = rng.gen_range(0.0..2.0);
    let v = dft.samples(&random_unit_direction(grid, 0.0, 3.0, seed)).unwrap();
    let times = grid.t_nodes();
    SpaceTimeField::from_fn(grid.nx, grid.nt, |k, m| v[k] * ((-times[m].powi(2) / 2.0).exp() * (omega * times[m]).cos()))
}

fn criterion_9() -> Outcome {
    let grid = Grid::new(32.0, 32, 16.0, 512).unwrap();
    let dft = Transform::new(&grid);
    let (b, b_prime) = (0.7, -0.2);
    let idx = XsbIndex::with_b_prime(0.0, b, b_prime);
    let eps = 1.0 - b + b_prime;
    let windows = [1.0, 0.5, 0.25, 0.125];
    let mut slopes = Vec::new();
    let mut constants = Vec::new();
    for seed in 0..5 {
        let f = smooth_forcing(&grid, &dft, seed);
        let outs: Vec<_> = windows
            .iter()
            .map(|&t| duhamel_apply(&f, t, &idx, &cubic(), &dft).unwrap())
            .collect();
        let pts: Vec<(f64, f64)> = windows.iter().zip(&outs).map(|(&t, o)| (t, o.out_norm)).collect();
        slopes.push(loglog_slope(&pts));
        constants.push(outs.iter().map(|o| o.ratio).fold(0.0, f64::max));
    }
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let stability = spread(&constants);
    outcome(
        min_slope >= eps - 0.15 && stability <= 2.0,
        format!(
            "smallest T-slope {min_slope:.3} (≥ {:.2}); constant max/min across F {stability:.3}",
            eps - 0.15
        ),
    )
}

/// `‖ψ‖_{H^b}` with the unitary Fourier transform, by direct quadrature.
fn window_hb_norm(b: f64) -> f64 {
    let nt = 4000;
    let h = 4.0 / nt as f64;
    let ts: Vec<f64> = (0..=nt).map(|j| -2.0 + j as f64 * h).collect();
    let values: Vec<f64> = ts.iter().map(|&t| psi(t)).collect();
    let dtau = 0.02;
    let taus: Vec<f64> = (0..=20_000).map(|m| -200.0 + m as f64 * dtau).collect();
    let total: f64 = taus
        .par_iter()
        .map(|&tau| {
            let hat: Complex<f64> = ts
                .iter()
                .zip(&values)
                .map(|(&t, &v)| Complex::from_polar(v, -t * tau))
                .sum::<Complex<f64>>()
                * h
                / (2.0 * std::f64::consts::PI).sqrt();
            (1.0 + tau.abs()).powf(2.0 * b) * hat.norm_sqr()
        })
        .sum();
    (total * dtau).sqrt()
}

fn criterion_10() -> Outcome {
    let grid = Grid::new(32.0, 32, 16.0, 512).unwrap();
    let dft = Transform::new(&grid);
    let b = 0.7;
    // |ξ| ≤ 3 keeps |φ(ξ)| < 40, well inside the τ lattice.
    let ratios: Vec<f64> = (0..20)
        .map(|seed| {
            let u0 = random_unit_direction(&grid, 0.0, 3.0, 100 + seed);
            linear_estimate_ratio(&u0, 0.0, b, &cubic(), &dft).unwrap()
        })
        .collect();
    let sp = spread(&ratios);
    let oracle = window_hb_norm(b);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    outcome(
        sp - 1.0 <= 0.05 && (mean / oracle - 1.0).abs() <= 0.01,
        format!(
            "20 ratios within {:.3}% of each other; mean {mean:.5} vs ‖ψ‖_H^b {oracle:.5}",
            100.0 * (sp - 1.0)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "counterexample norm scaling", criterion_1),
        (2, "ill-posedness threshold", criterion_2),
        (3, "elementary integral bounds", criterion_3),
        (4, "convergence dichotomy of I(0,0)", criterion_4),
        (5, "uniform bound of the resonance integral", criterion_5),
        (6, "trilinear search", criterion_6),
        (7, "L² conservation", criterion_7),
        (8, "solver convergence and cross-validation", criterion_8),
        (9, "Duhamel estimate", criterion_9),
        (10, "linear estimate", criterion_10),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (n, title, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let expected_red = EXPECTED_RED.contains(&n);
        let tag = match (result.passed, expected_red) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {n:>2} {tag}: {title}: {} [{:.1}s]",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        if !result.passed && !expected_red {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion/criteria failed");
        std::process::exit(1);
    }
}
