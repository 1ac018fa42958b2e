use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::counterexample::Resolution;
use crate::dynamics::{Dealias, Scheme, SolveConfig};
use crate::error::{LabError, Result};
use crate::quadrature::{log_space, QuadSpec};
use crate::spectral::{PhaseParams, SpaceTimeGrid};

/// One experiment run: what to compute, the seed every random draw derives
/// from, and where the report goes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub phase: PhaseConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("reports")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    CounterexampleScaling(CounterexampleParams),
    LemmaSuite(LemmaParams),
    UniformBound(UniformBoundParams),
    TrilinearSearch(TrilinearParams),
    Evolve(EvolveParams),
    PicardVsSplitstep(PicardParams),
    ContinuousDependence(DependenceParams),
    ExistenceTime(ExistenceParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CounterexampleScaling(_) => "counterexample_scaling",
            Experiment::LemmaSuite(_) => "lemma_suite",
            Experiment::UniformBound(_) => "uniform_bound",
            Experiment::TrilinearSearch(_) => "trilinear_search",
            Experiment::Evolve(_) => "evolve",
            Experiment::PicardVsSplitstep(_) => "picard_vs_splitstep",
            Experiment::ContinuousDependence(_) => "continuous_dependence",
            Experiment::ExistenceTime(_) => "existence_time",
        }
    }

    /// The experiment with all parameters at their defaults.
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "counterexample_scaling" => Experiment::CounterexampleScaling(Default::default()),
            "lemma_suite" => Experiment::LemmaSuite(Default::default()),
            "uniform_bound" => Experiment::UniformBound(Default::default()),
            "trilinear_search" => Experiment::TrilinearSearch(Default::default()),
            "evolve" => Experiment::Evolve(Default::default()),
            "picard_vs_splitstep" => Experiment::PicardVsSplitstep(Default::default()),
            "continuous_dependence" => Experiment::ContinuousDependence(Default::default()),
            "existence_time" => Experiment::ExistenceTime(Default::default()),
            _ => return None,
        })
    }
}

/// `φ(ξ) = αξ² + βξ³` and the nonlinear coefficient `γ = re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: [f64; 2],
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            gamma: [1.0, 0.0],
        }
    }
}

impl PhaseConfig {
    pub fn params(&self) -> Result<PhaseParams<f64>> {
        PhaseParams::new(self.alpha, self.beta, Complex::new(self.gamma[0], self.gamma[1]))
    }
}

/// Periodic space-time box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub nx: usize,
    pub t_span: f64,
    pub nt: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<SpaceTimeGrid<f64>> {
        SpaceTimeGrid::new(self.length, self.nx, self.t_span, self.nt)
    }

    fn dynamics_default() -> Self {
        Self {
            length: 50.0,
            nx: 256,
            t_span: 8.0,
            nt: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `A·e^{−x²/(2w²)}·e^{ik₀x}`.
    Gaussian,
    /// Random smooth data band-limited to `|ξ| ≤ band`, drawn from the seed.
    Random,
}

/// Initial datum; when `l2_norm` is set the datum is rescaled to that norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub kind: DataKind,
    pub amplitude: f64,
    pub width: f64,
    pub carrier: f64,
    pub band: f64,
    pub l2_norm: Option<f64>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            kind: DataKind::Gaussian,
            amplitude: 1.0,
            width: 1.5,
            carrier: 0.7,
            band: 4.0,
            l2_norm: None,
        }
    }
}

/// Solver controls as they appear in experiment files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub dealias: Dealias,
    pub scheme: Scheme,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self {
            dt: d.dt,
            dealias: d.dealias,
            scheme: d.scheme,
            picard_max_iters: d.picard_max_iters,
            picard_tol: d.picard_tol,
        }
    }
}

impl SolverConfig {
    pub fn solve(&self) -> SolveConfig {
        SolveConfig {
            dt: self.dt,
            dealias: self.dealias,
            scheme: self.scheme,
            picard_max_iters: self.picard_max_iters,
            picard_tol: self.picard_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleParams {
    pub s: f64,
    pub b: f64,
    pub ns: Vec<f64>,
    pub resolution: Resolution,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self {
            s: -0.5,
            b: 0.75,
            ns: vec![64.0, 128.0, 256.0, 512.0, 1024.0],
            resolution: Resolution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaParams {
    /// Exponent `b` of the bracket integrals.
    pub b: f64,
    /// Exponents of the singular integral.
    pub c1: f64,
    pub c2: f64,
    /// Scale ladder; every check is scanned along it.
    pub ladder: Vec<f64>,
    /// Largest allowed max/min ratio along a ladder.
    pub spread_limit: f64,
    pub quad: QuadSpec,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self {
            b: 0.75,
            c1: 0.6,
            c2: 0.6,
            ladder: log_space(1.0, 100.0, 2),
            spread_limit: 8.0,
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniformBoundParams {
    pub rho: f64,
    pub b: f64,
    /// Nonnegative `ξ` values; the scan uses `(ξ, y) → (−ξ, −y)` symmetry.
    pub xi: Vec<f64>,
    /// Rescaled modulations `z = y/ξ³`.
    pub z: Vec<f64>,
    /// Also rerun on a grid twice as dense with twice the truncation radius.
    pub refine: bool,
    /// `b` of the negative control at the same `ρ`.
    pub control_b: Option<f64>,
    /// Convergence classification of `I(0,0)` over a `(ρ, b)` lattice.
    pub lattice_rho: Vec<f64>,
    pub lattice_b: Vec<f64>,
    pub radii: Vec<f64>,
    pub quad: QuadSpec,
}

impl Default for UniformBoundParams {
    fn default() -> Self {
        let mut xi = vec![0.0];
        xi.extend(log_space(0.1, 100.0, 2));
        Self {
            rho: 0.2,
            b: 0.7,
            xi,
            z: vec![-1.0, -0.1, -0.01, 0.0, 0.01, 0.1, 1.0],
            refine: true,
            control_b: Some(0.5),
            lattice_rho: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            lattice_b: vec![0.2, 0.25, 0.6, 0.65, 0.7],
            radii: (0..7).map(|k| 16.0 * f64::powi(2.0, k)).collect(),
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrilinearParams {
    pub s: f64,
    pub b: f64,
    /// The search runs `2·ensemble` triples and compares the two prefixes.
    pub ensemble: usize,
    pub grid: GridConfig,
    pub bump_ns: Vec<f64>,
    pub resolution: Resolution,
    /// Largest tolerated growth for `s > −1/4`.
    pub bounded_growth: f64,
    /// Smallest required bump-family growth for `s < −1/4`.
    pub unbounded_growth: f64,
}

impl Default for TrilinearParams {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        Self {
            s: -0.2,
            b: 0.75,
            ensemble: 1000,
            grid: GridConfig {
                length: 16.0 * pi,
                nx: 64,
                t_span: 32.0 * pi,
                nt: 512,
            },
            bump_ns: vec![64.0, 128.0, 256.0, 512.0],
            resolution: Resolution::default(),
            bounded_growth: 1.5,
            unbounded_growth: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveParams {
    pub grid: GridConfig,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub t_final: f64,
    /// Sobolev index of the reported `H^s` norms.
    pub s: f64,
    /// Write the trajectory as an `XSBT` dump.
    pub dump: bool,
    pub drift_limit: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            grid: GridConfig::dynamics_default(),
            data: DataConfig::default(),
            solver: SolverConfig::default(),
            t_final: 1.0,
            s: 0.0,
            dump: true,
            drift_limit: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardParams {
    pub grid: GridConfig,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub t_final: f64,
    pub s: f64,
    /// Step sizes of the split-step self-convergence study; empty skips it.
    pub order_dts: Vec<f64>,
    pub agreement_limit: f64,
    pub ratio_limit: f64,
}

impl Default for PicardParams {
    fn default() -> Self {
        Self {
            grid: GridConfig::dynamics_default(),
            data: DataConfig {
                l2_norm: Some(0.1),
                ..DataConfig::default()
            },
            solver: SolverConfig::default(),
            t_final: 0.5,
            s: 0.0,
            order_dts: vec![0.05, 0.025, 0.0125, 0.00625],
            agreement_limit: 1e-6,
            ratio_limit: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DependenceParams {
    pub grid: GridConfig,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub t_final: f64,
    pub s: f64,
    pub deltas: Vec<f64>,
    /// Band of the random perturbation direction.
    pub direction_band: f64,
}

impl Default for DependenceParams {
    fn default() -> Self {
        Self {
            grid: GridConfig::dynamics_default(),
            data: DataConfig {
                l2_norm: Some(0.3),
                ..DataConfig::default()
            },
            solver: SolverConfig {
                dt: 1e-2,
                ..SolverConfig::default()
            },
            t_final: 1.0,
            s: 0.0,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            direction_band: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExistenceParams {
    pub grid: GridConfig,
    /// Shape; rescaled to unit `H^s` norm before the `λ` ladder is applied.
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub lambdas: Vec<f64>,
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    /// Constant of the contraction bound used for the certified floor.
    pub c_measured: f64,
    pub steps: usize,
    pub bisections: usize,
}

impl Default for ExistenceParams {
    fn default() -> Self {
        Self {
            grid: GridConfig::dynamics_default(),
            data: DataConfig::default(),
            solver: SolverConfig {
                picard_tol: 1e-10,
                ..SolverConfig::default()
            },
            lambdas: vec![1.0, 2.0, 4.0, 8.0],
            s: 0.0,
            b: 0.7,
            b_prime: -0.25,
            c_measured: 1.0,
            steps: 100,
            bisections: 8,
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Format(e.to_string()))
    }

    /// Every violated precondition, with the range it comes from.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if let Err(e) = self.phase.params() {
            errs.push(format!("phase: {e}"));
        }
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        match &self.experiment {
            Experiment::CounterexampleScaling(p) => {
                need(
                    p.b > 0.5 && p.b < 1.0,
                    format!("b = {} outside (1/2, 1), the range of the trilinear estimate", p.b),
                );
                need(p.s.is_finite(), format!("s = {} must be finite", p.s));
                ladder(&mut need, "ns", &p.ns, 4.0, 3);
                need(
                    p.resolution.bump_xi >= 64 && p.resolution.bump_sigma >= 64,
                    "resolution: the slab needs at least 64 x 64 samples".into(),
                );
            }
            Experiment::LemmaSuite(p) => {
                need(p.b > 0.5, format!("b = {} must exceed 1/2 for the bracket integrals to converge", p.b));
                need(
                    p.c1 > 0.0 && p.c1 < 1.0 && p.c2 > 0.0 && p.c2 < 1.0 && p.c1 + p.c2 > 1.0,
                    format!(
                        "c1 = {}, c2 = {} must satisfy 0 < c1, c2 < 1 < c1 + c2 for the singular integral",
                        p.c1, p.c2
                    ),
                );
                ladder(&mut need, "ladder", &p.ladder, f64::MIN_POSITIVE, 2);
                need(p.spread_limit >= 1.0, "spread_limit must be >= 1".into());
                quad_errors(&mut need, &p.quad);
            }
            Experiment::UniformBound(p) => {
                need(
                    p.rho > 0.0 && p.rho < 0.25,
                    format!("rho = {} outside (0, 1/4), the range of the uniform bound", p.rho),
                );
                need(
                    p.b > 7.0 / 12.0 && p.b < 11.0 / 12.0,
                    format!("b = {} outside (7/12, 11/12), the range of the uniform bound", p.b),
                );
                need(
                    p.xi.iter().all(|x| (0.0..=1e3).contains(x)) && !p.xi.is_empty(),
                    "xi: need nonempty values in [0, 1000]".into(),
                );
                need(!p.z.is_empty(), "z: need at least one value".into());
                if let Some(c) = p.control_b {
                    need(c > 0.0 && c < 1.0, format!("control_b = {c} outside (0, 1)"));
                }
                need(
                    p.lattice_rho.iter().all(|r| (0.0..0.25).contains(r)),
                    "lattice_rho: values must lie in [0, 1/4)".into(),
                );
                need(
                    p.lattice_b.iter().all(|b| *b > 0.0 && *b < 1.0),
                    "lattice_b: values must lie in (0, 1)".into(),
                );
                if !p.lattice_rho.is_empty() {
                    ladder(&mut need, "radii", &p.radii, f64::MIN_POSITIVE, 3);
                }
                quad_errors(&mut need, &p.quad);
            }
            Experiment::TrilinearSearch(p) => {
                need(
                    p.b > 7.0 / 12.0 && p.b < 11.0 / 12.0,
                    format!("b = {} outside (7/12, 11/12), the range of the trilinear estimate", p.b),
                );
                need(p.s <= 0.0 && p.s > -1.0, format!("s = {} outside (−1, 0]", p.s));
                need(p.ensemble > 0, "ensemble must be positive".into());
                grid_errors(&mut need, &p.grid);
                ladder(&mut need, "bump_ns", &p.bump_ns, 4.0, 2);
            }
            Experiment::Evolve(p) => {
                grid_errors(&mut need, &p.grid);
                solver_errors(&mut need, &p.solver);
                horizon(&mut need, p.t_final, &p.grid);
            }
            Experiment::PicardVsSplitstep(p) => {
                grid_errors(&mut need, &p.grid);
                solver_errors(&mut need, &p.solver);
                horizon(&mut need, p.t_final, &p.grid);
                need(
                    p.order_dts.is_empty() || p.order_dts.len() >= 3,
                    "order_dts: need none or at least three step sizes".into(),
                );
                for dt in &p.order_dts {
                    let steps = p.t_final / dt;
                    need(
                        *dt > 0.0 && (steps - steps.round()).abs() <= 1e-9 * steps,
                        format!("order_dts: t_final = {} is not a whole number of steps of {dt}", p.t_final),
                    );
                }
            }
            Experiment::ContinuousDependence(p) => {
                grid_errors(&mut need, &p.grid);
                solver_errors(&mut need, &p.solver);
                horizon(&mut need, p.t_final, &p.grid);
                need(
                    p.deltas.windows(2).all(|w| w[1] < w[0]) && p.deltas.iter().all(|d| *d >= 0.0),
                    "deltas: must be nonnegative and strictly decreasing".into(),
                );
                need(p.direction_band > 0.0, "direction_band must be positive".into());
            }
            Experiment::ExistenceTime(p) => {
                grid_errors(&mut need, &p.grid);
                solver_errors(&mut need, &p.solver);
                need(
                    1.0 - p.b + p.b_prime > 0.0,
                    format!("ε = 1 − b + b′ = {} must be positive for the contraction argument", 1.0 - p.b + p.b_prime),
                );
                need(
                    p.b_prime > -0.5 && p.b_prime <= 0.0 && p.b >= 0.0 && p.b <= p.b_prime + 1.0,
                    format!("(b, b′) = ({}, {}) outside −1/2 < b′ ≤ 0 ≤ b ≤ b′ + 1", p.b, p.b_prime),
                );
                ladder(&mut need, "lambdas", &p.lambdas, f64::MIN_POSITIVE, 1);
                need(p.c_measured > 0.0, "c_measured must be positive".into());
                need(p.steps > 0, "steps must be positive".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

fn ladder(need: &mut impl FnMut(bool, String), name: &str, v: &[f64], min: f64, len: usize) {
    need(
        v.len() >= len && v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| *x >= min),
        format!("{name}: need at least {len} strictly increasing values >= {min}"),
    );
}

fn quad_errors(need: &mut impl FnMut(bool, String), q: &QuadSpec) {
    if let Err(errs) = q.validate() {
        for e in errs {
            need(false, format!("quad: {e}"));
        }
    }
}

fn grid_errors(need: &mut impl FnMut(bool, String), g: &GridConfig) {
    if let Err(e) = g.grid() {
        need(false, format!("grid: {e}"));
    }
}

fn solver_errors(need: &mut impl FnMut(bool, String), s: &SolverConfig) {
    if let Err(errs) = s.solve().validate() {
        for e in errs {
            need(false, format!("solver: {e}"));
        }
    }
}

fn horizon(need: &mut impl FnMut(bool, String), t: f64, g: &GridConfig) {
    need(
        t > 0.0 && t <= g.t_span / 2.0,
        format!("t_final = {t} outside (0, t_span/2 = {}]", g.t_span / 2.0),
    );
}
