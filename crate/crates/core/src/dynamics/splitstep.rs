use num_complex::Complex;

use super::{Dealias, Scheme, SolveConfig, Trajectory};
use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{Dft, PhaseParams, SpaceTimeGrid, SpatialSpectrum};

/// Pointwise `iγ|u|²u`.
pub fn cubic_nonlinearity<T: Scalar>(u: &[Complex<T>], gamma: Complex<T>) -> Vec<Complex<T>> {
    let ig = Complex::new(-gamma.im, gamma.re);
    u.iter().map(|z| ig * z * z.norm_sqr()).collect()
}

/// 1 on kept modes, 0 on modes removed by the dealiasing rule.
pub fn dealias_mask<T: Scalar>(nx: usize, rule: Dealias) -> Vec<T> {
    (0..nx)
        .map(|i| {
            let k = SpaceTimeGrid::<T>::signed_index(i, nx).unsigned_abs() as usize;
            match rule {
                Dealias::None => T::one(),
                Dealias::TwoThirds if 3 * k <= nx => T::one(),
                Dealias::TwoThirds => T::zero(),
            }
        })
        .collect()
}

/// Spectrum of `iγ|u|²u`, with the input and output masked by `rule`.
pub fn nonlinearity_spectrum<T: Scalar>(
    u_hat: &SpatialSpectrum<T>,
    gamma: Complex<T>,
    rule: Dealias,
    dft: &Dft<T>,
) -> Result<SpatialSpectrum<T>> {
    let mask = dealias_mask::<T>(u_hat.len(), rule);
    let masked = SpatialSpectrum {
        values: u_hat.values.iter().zip(&mask).map(|(z, m)| z * *m).collect(),
    };
    let u = dft.samples(&masked)?;
    let mut f = dft.spectrum(&cubic_nonlinearity(&u, gamma))?;
    f.values.iter_mut().zip(&mask).for_each(|(z, m)| *z = *z * *m);
    Ok(f)
}

/// Exact flow of `∂ₜu = −iγ|u|²u` over time `h`, in place: `|u|²` evolves as
/// `m/(1 − 2 Im γ·m·h)` and the phase as `−γ·Λ` with `Λ = ∫|u|²`.
fn nonlinear_substep<T: Scalar>(u: &mut [Complex<T>], gamma: Complex<T>, h: T) -> bool {
    let gi = gamma.im;
    let two = T::lit(2.0);
    for z in u.iter_mut() {
        let m = z.norm_sqr();
        let lambda = if gi == T::zero() {
            m * h
        } else {
            let x = -two * gi * m * h;
            if x <= -T::one() {
                return false;
            }
            -x.ln_1p() / (two * gi)
        };
        // exp(−iγΛ) = exp(Im γ·Λ)·exp(−i Re γ·Λ)
        *z = *z * Complex::from_polar((gi * lambda).exp(), -gamma.re * lambda);
    }
    true
}

fn blowup_estimate<T: Scalar>(u: &[Complex<T>], gamma: Complex<T>, t: T) -> f64 {
    let m = u.iter().map(|z| z.norm_sqr()).fold(T::zero(), T::max);
    if gamma.im > T::zero() && m > T::zero() {
        (t + T::one() / (T::lit(2.0) * gamma.im * m)).to_f64_lossy()
    } else {
        f64::INFINITY
    }
}

struct Stepper<'a, T: Scalar> {
    dft: &'a Dft<T>,
    gamma: Complex<T>,
    scheme: Scheme,
    h: T,
    /// `e^{i h φ(ξ_k)}` times the dealiasing mask.
    multiplier: Vec<Complex<T>>,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    fn new(dft: &'a Dft<T>, params: &PhaseParams<T>, cfg: &SolveConfig, h: T) -> Self {
        let grid = dft.grid();
        let mask = dealias_mask::<T>(grid.nx, cfg.dealias);
        let multiplier = (0..grid.nx)
            .map(|i| Complex::from_polar(mask[i], h * params.phase(grid.xi(i))))
            .collect();
        Self {
            dft,
            gamma: params.gamma,
            scheme: cfg.scheme,
            h,
            multiplier,
        }
    }

    /// One step on physical samples; returns false on a non-finite state.
    fn step(&self, u: &mut [Complex<T>]) -> Result<bool> {
        let half = self.h / T::lit(2.0);
        let first = match self.scheme {
            Scheme::Strang => half,
            Scheme::Lie => self.h,
        };
        if !nonlinear_substep(u, self.gamma, first) {
            return Ok(false);
        }
        self.dft.forward_x(u)?;
        u.iter_mut().zip(&self.multiplier).for_each(|(z, m)| *z = *z * m);
        self.dft.inverse_x(u)?;
        if self.scheme == Scheme::Strang && !nonlinear_substep(u, self.gamma, half) {
            return Ok(false);
        }
        Ok(u.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

fn run<T: Scalar>(
    u0: &SpatialSpectrum<T>,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    t_final: f64,
    mut record: impl FnMut(usize, &[Complex<T>]) -> Result<()>,
) -> Result<Vec<Complex<T>>> {
    let steps = cfg.steps_for(t_final)?;
    let h = T::lit(cfg.dt);
    let stepper = Stepper::new(dft, params, cfg, h);
    let mut u = dft.samples(u0)?;
    for n in 1..=steps {
        if !stepper.step(&mut u)? {
            let t = T::from_usize_lossy(n) * h;
            return Err(LabError::NonFinite {
                time: t.to_f64_lossy(),
                blowup_estimate: blowup_estimate(&u, params.gamma, t),
            });
        }
        record(n, &u)?;
    }
    Ok(u)
}

/// Split-step evolution recording the spectrum at every step.
pub fn splitstep_evolve<T: Scalar>(
    u0: &SpatialSpectrum<T>,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    t_final: f64,
) -> Result<Trajectory<T>> {
    let grid = *dft.grid();
    let half_span = grid.t_span.to_f64_lossy() / 2.0;
    if t_final > half_span * (1.0 + 1e-12) {
        return Err(LabError::Precondition(format!(
            "T_final = {t_final} exceeds T_span/2 = {half_span}"
        )));
    }
    let mut states = vec![u0.clone()];
    let mut times = vec![T::zero()];
    run(u0, cfg, params, dft, t_final, |n, u| {
        states.push(dft.spectrum(u)?);
        times.push(T::from_usize_lossy(n) * T::lit(cfg.dt));
        Ok(())
    })?;
    Ok(Trajectory {
        grid,
        params: *params,
        dt: T::lit(cfg.dt),
        times,
        states,
    })
}

/// Split-step evolution returning only the final spectrum.
pub fn splitstep_final<T: Scalar>(
    u0: &SpatialSpectrum<T>,
    cfg: &SolveConfig,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
    t_final: f64,
) -> Result<SpatialSpectrum<T>> {
    let u = run(u0, cfg, params, dft, t_final, |_, _| Ok(()))?;
    dft.spectrum(&u)
}
