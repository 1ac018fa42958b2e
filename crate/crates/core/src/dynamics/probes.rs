use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::picard::picard_iterate;
use super::splitstep::splitstep_evolve;
use super::{ContractionParams, SolveConfig};
use crate::counterexample::{fit_scaling_exponent, ScalingReport};
use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{sobolev_norm, Dft, PhaseParams, SpaceTimeGrid, SpatialSpectrum};

/// Random direction with `‖·‖_{H^s} = 1`, supported on `|ξ| ≤ band` with a
/// Gaussian envelope so that it stays smooth.
pub fn random_unit_direction<T: Scalar>(
    grid: &SpaceTimeGrid<T>,
    s: T,
    band: T,
    seed: u64,
) -> SpatialSpectrum<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Complex<T>> = (0..grid.nx)
        .map(|i| {
            let xi = grid.xi(i);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if xi.abs() > band {
                return Complex::new(T::zero(), T::zero());
            }
            let env = (-(xi / band).powi(2) * T::lit(2.0)).exp();
            Complex::new(T::lit(re) * env, T::lit(im) * env)
        })
        .collect();
    let d = SpatialSpectrum { values };
    let n = sobolev_norm(&d, s, grid);
    d.scaled(T::one() / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependencePoint {
    pub delta: f64,
    /// `sup_{t ≤ T} ‖u − ũ‖_{H^s} / ‖u₀ − ũ₀‖_{H^s}`.
    pub ratio: f64,
}

/// Lipschitz ratios of the data-to-solution map along `direction` for each
/// `δ` in `deltas`; `δ = 0` is skipped.
#[allow(clippy::too_many_arguments)]
pub fn continuous_dependence_probe<T: Scalar>(
    u0: &SpatialSpectrum<T>,
    direction: &SpatialSpectrum<T>,
    deltas: &[f64],
    s: T,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    t_final: f64,
) -> Result<Vec<DependencePoint>> {
    let grid = *dft.grid();
    let dir_norm = sobolev_norm(direction, s, &grid);
    if !(dir_norm > T::zero()) {
        return Err(LabError::param("direction", "must be nonzero"));
    }
    let base = splitstep_evolve(u0, cfg, params, dft, t_final)?;
    deltas
        .par_iter()
        .filter(|d| **d != 0.0)
        .map(|&delta| {
            let pert = u0.add(&direction.scaled(T::lit(delta)));
            let traj = splitstep_evolve(&pert, cfg, params, dft, t_final)?;
            let dist = base.sup_distance(&traj, s);
            Ok(DependencePoint {
                delta,
                ratio: (dist / (T::lit(delta.abs()) * dir_norm)).to_f64_lossy(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceSample {
    pub lambda: f64,
    /// Largest `T` found with a converging Picard iteration.
    pub t_observed: f64,
    /// The probe ceiling was reached, so `t_observed` is a lower bound.
    pub censored: bool,
    /// `T` certified by the contraction bound with the measured constant.
    pub floor: f64,
    /// No converging `T` was found above the search floor.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub samples: Vec<ExistenceSample>,
    /// Fit of `ln T_observed` against `ln λ` over uncensored samples, when
    /// there are at least three.
    pub fit: Option<ScalingReport>,
    /// `−2/ε`, the exponent implied by the contraction bound.
    pub theory_slope: f64,
}

/// For each `λ`, bisects in `ln T` for the largest `T ≤ T_span/2` on which
/// Picard iteration from `λ·shape` converges, using `steps` time steps per
/// trial.
#[allow(clippy::too_many_arguments)]
pub fn existence_time_probe<T: Scalar>(
    shape: &SpatialSpectrum<T>,
    lambdas: &[f64],
    s: T,
    b: f64,
    b_prime: f64,
    c_measured: f64,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    steps: usize,
    bisections: usize,
) -> Result<ExistenceReport> {
    let grid = *dft.grid();
    let eps = 1.0 - b + b_prime;
    if !(eps > 0.0) {
        return Err(LabError::Precondition(format!("ε = 1 − b + b′ = {eps} must be positive")));
    }
    if steps == 0 {
        return Err(LabError::param("steps", "must be positive"));
    }
    let ceiling = grid.t_span.to_f64_lossy() / 2.0;
    let shape_norm = sobolev_norm(shape, s, &grid).to_f64_lossy();
    let converges = |u0: &SpatialSpectrum<T>, t: f64| -> bool {
        let trial = SolveConfig {
            dt: t / steps as f64,
            ..*cfg
        };
        matches!(picard_iterate(u0, &trial, params, dft, t, s), Ok(o) if o.converged)
    };
    let samples: Vec<ExistenceSample> = lambdas
        .par_iter()
        .map(|&lambda| {
            let u0 = shape.scaled(T::lit(lambda));
            let floor = ContractionParams::certified(c_measured, lambda * shape_norm, b, b_prime)
                .map(|c| c.t)
                .unwrap_or(0.0);
            if converges(&u0, ceiling) {
                return ExistenceSample {
                    lambda,
                    t_observed: ceiling,
                    censored: true,
                    floor,
                    exhausted: false,
                };
            }
            let mut hi = ceiling;
            let mut lo = ceiling / 2.0;
            let mut found = false;
            for _ in 0..40 {
                if converges(&u0, lo) {
                    found = true;
                    break;
                }
                hi = lo;
                lo /= 2.0;
            }
            if !found {
                return ExistenceSample {
                    lambda,
                    t_observed: 0.0,
                    censored: false,
                    floor,
                    exhausted: true,
                };
            }
            for _ in 0..bisections {
                let mid = (lo * hi).sqrt();
                if converges(&u0, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ExistenceSample {
                lambda,
                t_observed: lo,
                censored: false,
                floor,
                exhausted: false,
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| !s.censored && !s.exhausted)
        .map(|s| (s.lambda, s.t_observed))
        .collect();
    let fit = if pts.len() >= 3 {
        Some(fit_scaling_exponent(&pts)?)
    } else {
        None
    };
    Ok(ExistenceReport {
        samples,
        fit,
        theory_slope: -2.0 / eps,
    })
}
