//! Two independent solvers for `∂ₜu + iα∂ₓ²u + β∂ₓ³u + iγ|u|²u = 0` on the
//! periodic box, Strang split-step and Picard iteration of the Duhamel
//! formula, plus the well-posedness probes built on them.

mod export;
mod picard;
mod probes;
mod splitstep;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{PhaseParams, SpaceTimeGrid, SpatialSpectrum};

pub use export::{read_xsbt, write_xsbt, XsbtDump, XSBT_MAGIC, XSBT_VERSION};
pub use picard::{duhamel_apply, picard_iterate, DuhamelOutput, PicardOutcome};
pub use probes::{
    continuous_dependence_probe, existence_time_probe, random_unit_direction, DependencePoint,
    ExistenceReport, ExistenceSample,
};
pub use splitstep::{
    cubic_nonlinearity, dealias_mask, nonlinearity_spectrum, splitstep_evolve, splitstep_final,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Zero modes with `|k| > Nx/3` around every cubic product.
    #[default]
    TwoThirds,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Half nonlinear, full linear, half nonlinear.
    #[default]
    Strang,
    /// Full nonlinear then full linear.
    Lie,
}

/// Time stepping and iteration controls. The linear substep is exact, so
/// `dt` is limited by accuracy only, not by the size of `φ` on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub dt: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub scheme: Scheme,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            dealias: Dealias::TwoThirds,
            scheme: Scheme::Strang,
            picard_max_iters: 60,
            picard_tol: 1e-12,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errs.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.picard_tol > 0.0) {
            errs.push(format!("picard_tol = {} must be positive", self.picard_tol));
        }
        if self.picard_max_iters == 0 {
            errs.push("picard_max_iters must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    fn steps_for(&self, t_final: f64) -> Result<usize> {
        self.validate().map_err(LabError::Validation)?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(LabError::param("T", format!("{t_final} must be finite and nonnegative")));
        }
        let n = (t_final / self.dt).round();
        if (n * self.dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(LabError::param(
                "dt",
                format!("T = {t_final} is not a whole number of steps of {}", self.dt),
            ));
        }
        Ok(n as usize)
    }
}

/// States on the time nodes `t_n = n·dt`, `n = 0..=steps`.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub grid: SpaceTimeGrid<T>,
    pub params: PhaseParams<T>,
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<SpatialSpectrum<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &SpatialSpectrum<T> {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().all(|s| s.is_finite())
    }

    /// `sup_n ‖u(t_n) − v(t_n)‖_{H^s}` over common nodes.
    pub fn sup_distance(&self, other: &Self, s: T) -> T {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| crate::spectral::sobolev_norm(&a.sub(b), s, &self.grid))
            .fold(T::zero(), T::max)
    }
}

/// Contraction bookkeeping: `M = 2C‖u₀‖_{H^s}` and `T^ε ≤ 1/(2CM²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionParams {
    pub m: f64,
    pub t: f64,
    pub eps_contraction: f64,
    pub c_measured: f64,
}

impl ContractionParams {
    /// Largest `T` the bound certifies for data of norm `u0_norm`.
    pub fn certified(c_measured: f64, u0_norm: f64, b: f64, b_prime: f64) -> Result<Self> {
        let eps = 1.0 - b + b_prime;
        if !(eps > 0.0) {
            return Err(LabError::Precondition(format!("ε = 1 − b + b′ = {eps} must be positive")));
        }
        if !(c_measured > 0.0 && u0_norm > 0.0) {
            return Err(LabError::param("C, ‖u₀‖", "must be positive"));
        }
        let m = 2.0 * c_measured * u0_norm;
        let t = (1.0 / (2.0 * c_measured * m * m)).powf(1.0 / eps);
        Ok(Self {
            m,
            t,
            eps_contraction: eps,
            c_measured,
        })
    }

    pub fn satisfied(&self) -> bool {
        self.eps_contraction > 0.0
            && self.t.powf(self.eps_contraction) <= 1.0 / (2.0 * self.c_measured * self.m * self.m) * (1.0 + 1e-12)
    }
}
