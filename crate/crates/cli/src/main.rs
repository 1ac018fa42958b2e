use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use xsb_lab::harness::{catalog, run_experiment, Experiment, ExperimentConfig};

/// Numerical experiments on X^{s,b} estimates for the third-order NLS.
#[derive(Parser)]
#[command(name = "xsb-lab", version, arg_required_else_help = true)]
struct Cli {
    /// Print the experiment catalog and exit.
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Bump counterexample scaling in N.
    Counterexample(Overrides),
    /// Elementary integral bounds.
    Lemmas(Overrides),
    /// Uniform bound of the resonance integral.
    BoundScan(Overrides),
    /// Random search for the trilinear ratio.
    Trilinear(Overrides),
    /// Split-step evolution.
    Evolve(Overrides),
    /// Picard iteration against split-step.
    Picard(Overrides),
    /// Continuous dependence on the data.
    Dependence(Overrides),
    /// Existence time against data size.
    ExistenceTime(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Experiment file (TOML, or JSON with a `.json` extension).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Any experiment parameter as `dotted.path=value`; values are parsed as
    /// JSON, falling back to a string. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &Overrides) {
        match self {
            Command::Counterexample(o) => ("counterexample_scaling", o),
            Command::Lemmas(o) => ("lemma_suite", o),
            Command::BoundScan(o) => ("uniform_bound", o),
            Command::Trilinear(o) => ("trilinear_search", o),
            Command::Evolve(o) => ("evolve", o),
            Command::Picard(o) => ("picard_vs_splitstep", o),
            Command::Dependence(o) => ("continuous_dependence", o),
            Command::ExistenceTime(o) => ("existence_time", o),
        }
    }
}

fn set_path(root: &mut Value, path: &str, value: Value) -> anyhow::Result<()> {
    let (parents, leaf) = path.rsplit_once('.').map_or(("", path), |(p, l)| (p, l));
    let mut cur = root;
    for k in parents.split('.').filter(|k| !k.is_empty()) {
        cur = cur.get_mut(k).with_context(|| format!("`{path}`: no parameter `{k}`"))?;
    }
    match cur.get_mut(leaf) {
        Some(slot) => *slot = value,
        None => bail!("`{path}`: no parameter `{leaf}`"),
    }
    Ok(())
}

fn build_config(kind: &str, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let cfg = match &o.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment.name() != kind {
                bail!(
                    "{} describes a `{}` experiment, not `{kind}`",
                    path.display(),
                    cfg.experiment.name()
                );
            }
            cfg
        }
        None => ExperimentConfig {
            experiment: Experiment::default_for(kind).expect("subcommands map to known kinds"),
            seed: 0,
            output_dir: PathBuf::from("reports").join(kind),
            phase: Default::default(),
        },
    };
    let mut v = serde_json::to_value(&cfg)?;
    let named = [
        ("s", "experiment.s", o.s),
        ("b", "experiment.b", o.b),
        ("rho", "experiment.rho", o.rho),
        ("t-final", "experiment.t_final", o.t_final),
        ("dt", "experiment.solver.dt", o.dt),
        ("alpha", "phase.alpha", o.alpha),
        ("beta", "phase.beta", o.beta),
    ];
    for (flag, path, val) in named {
        if let Some(x) = val {
            set_path(&mut v, path, x.into()).with_context(|| format!("--{flag} does not apply to `{kind}`"))?;
        }
    }
    for s in &o.sets {
        let (k, raw) = s.split_once('=').with_context(|| format!("--set `{s}`: expected KEY=VALUE"))?;
        let val = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let top = k.starts_with("phase.") || k == "seed" || k == "output_dir";
        let path = if top { k.to_string() } else { format!("experiment.{k}") };
        set_path(&mut v, &path, val)?;
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(v).context("overridden config")?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &o.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(n) = std::env::var("XSB_LAB_THREADS") {
        let n: usize = n.parse().with_context(|| format!("XSB_LAB_THREADS=`{n}` is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.list {
        for (name, about) in catalog() {
            println!("{name:<24} {about}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(cmd) = cli.command else {
        bail!("no experiment given; see --help");
    };
    init_threads()?;
    let (kind, o) = cmd.split();
    let cfg = build_config(kind, o)?;
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(xsb_lab::LabError::Validation(errs)) => {
            for e in &errs {
                eprintln!("invalid config: {e}");
            }
            bail!("{} violated precondition(s)", errs.len());
        }
        Err(e) => return Err(e.into()),
    };
    for v in &report.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for f in &report.failures {
        println!("INCOMPLETE {f}");
    }
    println!("report: {}", cfg.output_dir.display());
    Ok(if report.incomplete() {
        ExitCode::from(2)
    } else if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
