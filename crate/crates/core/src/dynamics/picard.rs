use num_complex::Complex;

use super::splitstep::nonlinearity_spectrum;
use super::{SolveConfig, Trajectory};
use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{free_evolve, sobolev_norm, Dft, PhaseParams, SpaceTimeField, SpatialSpectrum};
use crate::xsb::{xsb_norm, TimeWindow, XsbIndex};

/// Result of a Picard run.
#[derive(Debug, Clone)]
pub struct PicardOutcome<T> {
    pub trajectory: Trajectory<T>,
    /// `sup_t ‖u^{k+1} − u^k‖_{H^s}` per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl<T> PicardOutcome<T> {
    /// Successive residual ratios.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// `e^{itφ(ξ)}` per mode at time `t`.
fn propagator<T: Scalar>(t: T, params: &PhaseParams<T>, dft: &Dft<T>) -> Vec<Complex<T>> {
    let grid = dft.grid();
    (0..grid.nx)
        .map(|i| Complex::from_polar(T::one(), t * params.phase(grid.xi(i))))
        .collect()
}

/// Iterates `u^{k+1}(t) = U(t)u₀ − ∫₀ᵗ U(t−t′) F(u^k)(t′) dt′` on the nodes
/// `t_n = n·dt` of `[0, T]`, starting from the free solution. The integral is
/// the composite trapezoid rule per mode applied to `e^{−it′φ} F̂(t′)`. On
/// `[0, T]` with `T ≤ 1` both cut-offs of the windowed equation equal one, so
/// this is also the windowed fixed point there.
pub fn picard_iterate<T: Scalar>(
    u0: &SpatialSpectrum<T>,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    t_final: f64,
    s: T,
) -> Result<PicardOutcome<T>> {
    let grid = *dft.grid();
    let steps = cfg.steps_for(t_final)?;
    let h = T::lit(cfg.dt);
    let times: Vec<T> = (0..=steps).map(|n| T::from_usize_lossy(n) * h).collect();
    let forward: Vec<Vec<Complex<T>>> = times.iter().map(|&t| propagator(t, params, dft)).collect();
    let mut states: Vec<SpatialSpectrum<T>> = times
        .iter()
        .map(|&t| free_evolve(u0, t, params, &grid))
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut rising = 0;
    let half = h / T::lit(2.0);
    for _ in 0..cfg.picard_max_iters {
        let mut next = Vec::with_capacity(states.len());
        let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.nx];
        let mut prev_g: Option<Vec<Complex<T>>> = None;
        for (n, state) in states.iter().enumerate() {
            let f = nonlinearity_spectrum(state, params.gamma, cfg.dealias, dft)?;
            let g: Vec<Complex<T>> = f
                .values
                .iter()
                .zip(&forward[n])
                .map(|(z, e)| z * e.conj())
                .collect();
            if let Some(pg) = &prev_g {
                for ((a, x), y) in acc.iter_mut().zip(pg).zip(&g) {
                    *a = *a + (x + y) * half;
                }
            }
            let values = u0
                .values
                .iter()
                .zip(&acc)
                .zip(&forward[n])
                .map(|((u, a), e)| (u - a) * e)
                .collect();
            next.push(SpatialSpectrum { values });
            prev_g = Some(g);
        }
        if next.iter().any(|s| !s.is_finite()) {
            let t = next.iter().position(|s| !s.is_finite()).unwrap_or(0);
            return Err(LabError::NonFinite {
                time: times[t].to_f64_lossy(),
                blowup_estimate: f64::NAN,
            });
        }
        let r = states
            .iter()
            .zip(&next)
            .map(|(a, b)| sobolev_norm(&a.sub(b), s, &grid))
            .fold(T::zero(), T::max)
            .to_f64_lossy();
        if let Some(&last) = residuals.last() {
            rising = if r >= last { rising + 1 } else { 0 };
        }
        residuals.push(r);
        states = next;
        if r < cfg.picard_tol {
            converged = true;
            break;
        }
        if rising >= 3 {
            return Err(LabError::OutsideContraction { residuals });
        }
    }
    Ok(PicardOutcome {
        trajectory: Trajectory {
            grid,
            params: *params,
            dt: h,
            times,
            states,
        },
        residuals,
        converged,
    })
}

/// Windowed Duhamel term and its measured constant.
#[derive(Debug, Clone)]
pub struct DuhamelOutput<T> {
    pub field: SpaceTimeField<T>,
    pub out_norm: f64,
    pub forcing_norm: f64,
    /// `‖out‖_{X^{s,b}} / (T^{1−b+b′} ‖F‖_{X^{s,b′}})`.
    pub ratio: f64,
}

/// `ψ_T(t) ∫₀ᵗ U(t−t′) F(t′) dt′` on the space-time grid, by the per-mode
/// trapezoid rule outward from the node `t = 0` in both time directions.
pub fn duhamel_apply<T: Scalar>(
    forcing: &SpaceTimeField<T>,
    t_window: T,
    idx: &XsbIndex<T>,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
) -> Result<DuhamelOutput<T>> {
    let grid = *dft.grid();
    forcing.check(&grid)?;
    idx.validate_duhamel().map_err(LabError::Validation)?;
    if !(t_window > T::zero() && t_window <= T::one()) {
        return Err(LabError::param("T", format!("{t_window} not in (0, 1]")));
    }
    let window = TimeWindow::smooth(t_window);
    window.check(&grid)?;
    let (nx, nt) = (grid.nx, grid.nt);
    let times = grid.t_nodes();
    let g: Vec<Vec<Complex<T>>> = (0..nt)
        .map(|j| {
            let f = dft.spectrum(&forcing.values[j * nx..(j + 1) * nx])?;
            let e = propagator(-times[j], params, dft);
            Ok(f.values.iter().zip(&e).map(|(a, b)| a * b).collect())
        })
        .collect::<Result<_>>()?;
    let half = grid.dt() / T::lit(2.0);
    let zero = Complex::new(T::zero(), T::zero());
    let mut integral = vec![vec![zero; nx]; nt];
    let origin = nt / 2;
    for j in origin + 1..nt {
        for k in 0..nx {
            integral[j][k] = integral[j - 1][k] + (g[j - 1][k] + g[j][k]) * half;
        }
    }
    for j in (0..origin).rev() {
        for k in 0..nx {
            integral[j][k] = integral[j + 1][k] - (g[j + 1][k] + g[j][k]) * half;
        }
    }
    let mut values = Vec::with_capacity(nx * nt);
    for j in 0..nt {
        let w = window.value(times[j]);
        if w == T::zero() {
            values.extend(std::iter::repeat_n(zero, nx));
            continue;
        }
        let e = propagator(times[j], params, dft);
        let spec = SpatialSpectrum {
            values: integral[j].iter().zip(&e).map(|(a, b)| a * b * w).collect(),
        };
        values.extend(dft.samples(&spec)?);
    }
    let field = SpaceTimeField { nx, nt, values };
    let out_norm = xsb_norm(&dft.spectral_field(&field)?, idx.s, idx.b, params, &grid)?;
    let f_norm = xsb_norm(&dft.spectral_field(forcing)?, idx.s, idx.b_prime, params, &grid)?;
    let ratio = if f_norm > T::zero() {
        out_norm / (t_window.powf(idx.epsilon()) * f_norm)
    } else {
        T::zero()
    };
    Ok(DuhamelOutput {
        field,
        out_norm: out_norm.to_f64_lossy(),
        forcing_norm: f_norm.to_f64_lossy(),
        ratio: ratio.to_f64_lossy(),
    })
}
