//! Config-driven experiments. Each run validates its config, computes, and
//! writes a report directory:
//!
//! ```text
//! <output_dir>/summary.json     config echo, verdicts, results, failures
//! <output_dir>/tables/*.csv
//! <output_dir>/plotdata/*.dat
//! ```

mod config;
mod plotdata;
mod report;
mod runners;

pub use config::*;
pub use plotdata::{emit_plotdata, parse_plotdata, Series};
pub use report::{ReportBundle, Verdict};
pub use runners::initial_data;

use crate::error::{LabError, Result};

/// Name and one-line description of every experiment kind.
pub fn catalog() -> &'static [(&'static str, &'static str)] {
    &[
        ("counterexample_scaling", "bump counterexample: norm and ratio scaling in N"),
        ("lemma_suite", "elementary integral bounds along scale ladders"),
        ("uniform_bound", "sup of the resonance integral, refinement, control and (rho, b) dichotomy"),
        ("trilinear_search", "random search for the trilinear ratio and the bump family"),
        ("evolve", "split-step evolution with L2 conservation check and trajectory dump"),
        ("picard_vs_splitstep", "Picard contraction, agreement with split-step and its order"),
        ("continuous_dependence", "Lipschitz ratio of the data-to-solution map"),
        ("existence_time", "observed contraction time against data size"),
    ]
}

fn refs(e: &Experiment) -> Vec<String> {
    let r: &[&str] = match e {
        Experiment::CounterexampleScaling(_) => &["failure of the trilinear estimate below s = -1/4"],
        Experiment::LemmaSuite(_) => &["elementary bracket and singular integral bounds"],
        Experiment::UniformBound(_) => &[
            "uniform bound of the resonance integral for 0 < rho < 1/4, 7/12 < b < 11/12",
            "convergence of I(0,0) exactly when b > rho + 1/3",
        ],
        Experiment::TrilinearSearch(_) => &[
            "trilinear estimate for s > -1/4",
            "failure of the trilinear estimate below s = -1/4",
        ],
        Experiment::Evolve(_) => &["L2 conservation for real gamma"],
        Experiment::PicardVsSplitstep(_) => &["contraction of the Duhamel map for small data"],
        Experiment::ContinuousDependence(_) => &["Lipschitz dependence of the solution on the data"],
        Experiment::ExistenceTime(_) => &["contraction time T^eps <= 1/(2CM^2)"],
    };
    r.iter().map(|s| s.to_string()).collect()
}

/// Computes the experiment without touching the filesystem.
pub fn compute(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate().map_err(LabError::Validation)?;
    let params = cfg.phase.params()?;
    let seed = cfg.seed;
    let mut out = ReportBundle {
        refs: refs(&cfg.experiment),
        config: serde_json::to_value(cfg).map_err(|e| LabError::Format(e.to_string()))?,
        ..Default::default()
    };
    out.put("experiment", cfg.experiment.name());
    match &cfg.experiment {
        Experiment::CounterexampleScaling(p) => runners::counterexample(p, seed, &params, &mut out),
        Experiment::LemmaSuite(p) => runners::lemmas(p, &mut out),
        Experiment::UniformBound(p) => runners::uniform_bound(p, &params, &mut out),
        Experiment::TrilinearSearch(p) => runners::trilinear(p, seed, &params, &mut out),
        Experiment::Evolve(p) => runners::evolve(p, seed, &params, &mut out)?,
        Experiment::PicardVsSplitstep(p) => runners::picard(p, seed, &params, &mut out)?,
        Experiment::ContinuousDependence(p) => runners::dependence(p, seed, &params, &mut out)?,
        Experiment::ExistenceTime(p) => runners::existence(p, seed, &params, &mut out)?,
    }
    Ok(out)
}

/// Computes the experiment and writes its report to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let out = compute(cfg)?;
    out.write(&cfg.output_dir)?;
    Ok(out)
}
