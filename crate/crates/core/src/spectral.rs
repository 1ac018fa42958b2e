//! Grids, the unitary discrete Fourier transform, the dispersion symbol
//! `φ(ξ) = αξ² + βξ³`, the free propagator and Sobolev norms.
//!
//! # Sign convention
//!
//! The equation `∂ₜu + iα∂ₓ²u + β∂ₓ³u + iγ|u|²u = 0` becomes, after the
//! spatial Fourier transform `∂ₓ → iξ`,
//!
//! ```text
//! ∂ₜû = iαξ²û + iβξ³û − (nonlinear) = iφ(ξ)û − (nonlinear),
//! ```
//!
//! so the free propagator is the multiplier `U(t) = e^{itφ(ξ)}`. A free
//! solution `u(x,t) = ∫ e^{ixξ + itφ(ξ)} û₀(ξ) dξ` has a space-time transform
//! (forward kernel `e^{−i(xξ + tτ)}` in both variables) supported on the
//! curve `τ = φ(ξ)`, which is exactly where the modulation weight
//! `<τ − φ(ξ)>` equals one.
//!
//! # Normalisation
//!
//! [`Dft`] is unitary on raw sample arrays, so discrete Parseval holds with
//! constant one. Spectra handed to the rest of the crate
//! ([`SpatialSpectrum`], [`SpectralField`]) carry physical amplitudes: the
//! unitary coefficients are rescaled so that sums against the frequency
//! cell (`2π/L` in space, `2π/T_span` in time) reproduce continuum
//! `L²` norms of the sampled function.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Coefficients of `∂ₜu + iα∂ₓ²u + β∂ₓ³u + iγ|u|²u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: Complex<T>,
}

impl<T: Scalar> PhaseParams<T> {
    pub fn new(alpha: T, beta: T, gamma: Complex<T>) -> Result<Self> {
        if beta == T::zero() || !beta.is_finite() {
            return Err(LabError::param("beta", "must be finite and nonzero"));
        }
        if !alpha.is_finite() || !gamma.re.is_finite() || !gamma.im.is_finite() {
            return Err(LabError::param("alpha/gamma", "must be finite"));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// `α = 0, β = 1`: the purely cubic dispersion used by the scaling runs.
    pub fn cubic(gamma: Complex<T>) -> Self {
        Self {
            alpha: T::zero(),
            beta: T::one(),
            gamma,
        }
    }

    #[inline]
    pub fn phase(&self, xi: T) -> T {
        phase_symbol(xi, self)
    }

    /// `φ'(ξ)`.
    #[inline]
    pub fn phase_slope(&self, xi: T) -> T {
        T::lit(2.0) * self.alpha * xi + T::lit(3.0) * self.beta * xi * xi
    }

    /// `φ''(ξ)`.
    #[inline]
    pub fn phase_curvature(&self, xi: T) -> T {
        T::lit(2.0) * self.alpha + T::lit(6.0) * self.beta * xi
    }

    /// `φ(u) − φ(v)` evaluated without cancellation between large terms.
    #[inline]
    pub fn phase_difference(&self, u: T, v: T) -> T {
        (u - v) * (self.alpha * (u + v) + self.beta * (u * u + u * v + v * v))
    }

    /// Conservation checks apply only when `|Im γ| < 1e-14`.
    pub fn gamma_is_real(&self) -> bool {
        self.gamma.im.abs().to_f64_lossy() < 1e-14
    }
}

/// `φ(ξ) = αξ² + βξ³`.
#[inline]
pub fn phase_symbol<T: Scalar>(xi: T, params: &PhaseParams<T>) -> T {
    xi * xi * (params.alpha + params.beta * xi)
}

/// Periodic spatial box `[−L/2, L/2)` and time box `[−T_span/2, T_span/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid<T> {
    pub length: T,
    pub nx: usize,
    pub t_span: T,
    pub nt: usize,
}

fn check_count(name: &'static str, n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(LabError::param(name, format!("{n} is not a power of two ≥ 8")));
    }
    Ok(())
}

impl<T: Scalar> SpaceTimeGrid<T> {
    pub fn new(length: T, nx: usize, t_span: T, nt: usize) -> Result<Self> {
        check_count("nx", nx)?;
        check_count("nt", nt)?;
        if !(length > T::zero() && length.is_finite()) {
            return Err(LabError::param("length", "must be positive"));
        }
        if !(t_span > T::zero() && t_span.is_finite()) {
            return Err(LabError::param("t_span", "must be positive"));
        }
        Ok(Self {
            length,
            nx,
            t_span,
            nt,
        })
    }

    /// Spatial spacing `h = L / Nx`.
    pub fn dx(&self) -> T {
        self.length / T::from_usize_lossy(self.nx)
    }

    pub fn dt(&self) -> T {
        self.t_span / T::from_usize_lossy(self.nt)
    }

    /// Spatial frequency spacing `2π / L`.
    pub fn dxi(&self) -> T {
        T::TAU() / self.length
    }

    pub fn dtau(&self) -> T {
        T::TAU() / self.t_span
    }

    /// `(2π/L)(2π/T_span)`.
    pub fn cell_area(&self) -> T {
        self.dxi() * self.dtau()
    }

    /// Signed wavenumber of canonical FFT slot `i` in a transform of length `n`.
    #[inline]
    pub fn signed_index(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Canonical FFT slot of signed wavenumber `k ∈ [−n/2, n/2)`.
    #[inline]
    pub fn fft_slot(k: i64, n: usize) -> usize {
        k.rem_euclid(n as i64) as usize
    }

    /// `ξ` at canonical slot `i`.
    #[inline]
    pub fn xi(&self, i: usize) -> T {
        T::lit(Self::signed_index(i, self.nx) as f64) * self.dxi()
    }

    #[inline]
    pub fn tau(&self, m: usize) -> T {
        T::lit(Self::signed_index(m, self.nt) as f64) * self.dtau()
    }

    pub fn xi_values(&self) -> Vec<T> {
        (0..self.nx).map(|i| self.xi(i)).collect()
    }

    pub fn tau_values(&self) -> Vec<T> {
        (0..self.nt).map(|m| self.tau(m)).collect()
    }

    pub fn x_nodes(&self) -> Vec<T> {
        let half = self.length / T::lit(2.0);
        (0..self.nx)
            .map(|j| T::from_usize_lossy(j) * self.dx() - half)
            .collect()
    }

    /// Time nodes `t_j = −T_span/2 + j·dt`; node `nt/2` is `t = 0`.
    pub fn t_nodes(&self) -> Vec<T> {
        let half = self.t_span / T::lit(2.0);
        (0..self.nt)
            .map(|j| T::from_usize_lossy(j) * self.dt() - half)
            .collect()
    }

    /// Factor mapping unitary spatial DFT coefficients to physical amplitudes.
    pub fn spatial_scale(&self) -> T {
        self.length / (T::TAU() * T::from_usize_lossy(self.nx)).sqrt()
    }

    /// Factor mapping unitary space-time DFT coefficients to physical amplitudes.
    pub fn spacetime_scale(&self) -> T {
        let n = T::from_usize_lossy(self.nx * self.nt);
        self.dx() * self.dt() * n.sqrt() / T::TAU()
    }

    /// Largest `|ξ|` on the lattice.
    pub fn xi_max(&self) -> T {
        T::from_usize_lossy(self.nx / 2) * self.dxi()
    }
}

/// Physical Fourier amplitudes `û(ξ_k)` in canonical FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSpectrum<T> {
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> SpatialSpectrum<T> {
    pub fn zeros(nx: usize) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); nx],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn check(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
        if self.len() != grid.nx {
            return Err(LabError::DimensionMismatch {
                expected: format!("{} spatial modes", grid.nx),
                got: format!("{}", self.len()),
            });
        }
        Ok(())
    }
}

/// Physical space-time samples, time-major: `values[j * nx + i] = u(x_i, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<T> {
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<Complex<T>>,
}

/// Space-time amplitudes `û(ξ_k, τ_m)`, stored `values[m * nx + k]` with both
/// indices in canonical FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<Complex<T>>,
}

macro_rules! field_common {
    ($ty:ident) => {
        impl<T: Scalar> $ty<T> {
            pub fn zeros(nx: usize, nt: usize) -> Self {
                Self {
                    nx,
                    nt,
                    values: vec![Complex::new(T::zero(), T::zero()); nx * nt],
                }
            }

            pub fn from_fn(nx: usize, nt: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
                let mut values = Vec::with_capacity(nx * nt);
                for m in 0..nt {
                    for k in 0..nx {
                        values.push(f(k, m));
                    }
                }
                Self { nx, nt, values }
            }

            #[inline]
            pub fn at(&self, k: usize, m: usize) -> Complex<T> {
                self.values[m * self.nx + k]
            }

            #[inline]
            pub fn at_mut(&mut self, k: usize, m: usize) -> &mut Complex<T> {
                &mut self.values[m * self.nx + k]
            }

            pub fn is_finite(&self) -> bool {
                self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            pub fn scaled(&self, c: Complex<T>) -> Self {
                Self {
                    nx: self.nx,
                    nt: self.nt,
                    values: self.values.iter().map(|z| z * c).collect(),
                }
            }

            pub fn check(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
                if self.nx != grid.nx || self.nt != grid.nt || self.values.len() != grid.nx * grid.nt {
                    return Err(LabError::DimensionMismatch {
                        expected: format!("{}×{}", grid.nx, grid.nt),
                        got: format!("{}×{} ({} values)", self.nx, self.nt, self.values.len()),
                    });
                }
                Ok(())
            }
        }
    };
}

field_common!(SpaceTimeField);
field_common!(SpectralField);

/// Unitary DFT plans for one grid.
///
/// Holds no mutable state, so one instance may be shared between workers.
#[derive(Clone)]
pub struct Dft<T: Scalar> {
    grid: SpaceTimeGrid<T>,
    fwd_x: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    fwd_t: Arc<dyn Fft<T>>,
    inv_t: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("grid", &self.grid).finish()
    }
}

impl<T: Scalar> Dft<T> {
    pub fn new(grid: &SpaceTimeGrid<T>) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fwd_x: planner.plan_fft(grid.nx, FftDirection::Forward),
            inv_x: planner.plan_fft(grid.nx, FftDirection::Inverse),
            fwd_t: planner.plan_fft(grid.nt, FftDirection::Forward),
            inv_t: planner.plan_fft(grid.nt, FftDirection::Inverse),
        }
    }

    pub fn grid(&self) -> &SpaceTimeGrid<T> {
        &self.grid
    }

    fn scale(buf: &mut [Complex<T>], c: T) {
        buf.iter_mut().for_each(|z| *z = *z * c);
    }

    /// In-place unitary forward transform of one spatial row.
    pub fn forward_x(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check_len(buf.len(), self.grid.nx)?;
        self.fwd_x.process(buf);
        Self::scale(buf, T::one() / T::from_usize_lossy(self.grid.nx).sqrt());
        Ok(())
    }

    pub fn inverse_x(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check_len(buf.len(), self.grid.nx)?;
        self.inv_x.process(buf);
        Self::scale(buf, T::one() / T::from_usize_lossy(self.grid.nx).sqrt());
        Ok(())
    }

    /// In-place unitary 2-D transform of a time-major `nt × nx` array.
    pub fn forward_xt(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.transform_xt(buf, &self.fwd_x, &self.fwd_t)
    }

    pub fn inverse_xt(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.transform_xt(buf, &self.inv_x, &self.inv_t)
    }

    fn transform_xt(&self, buf: &mut [Complex<T>], px: &Arc<dyn Fft<T>>, pt: &Arc<dyn Fft<T>>) -> Result<()> {
        let (nx, nt) = (self.grid.nx, self.grid.nt);
        self.check_len(buf.len(), nx * nt)?;
        px.process(buf);
        let mut col = vec![Complex::new(T::zero(), T::zero()); nt];
        for k in 0..nx {
            for (m, c) in col.iter_mut().enumerate() {
                *c = buf[m * nx + k];
            }
            pt.process(&mut col);
            for (m, c) in col.iter().enumerate() {
                buf[m * nx + k] = *c;
            }
        }
        Self::scale(buf, T::one() / T::from_usize_lossy(nx * nt).sqrt());
        Ok(())
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(LabError::DimensionMismatch {
                expected: expected.to_string(),
                got: got.to_string(),
            });
        }
        Ok(())
    }

    /// Physical spectrum of spatial samples `u(x_j)`.
    pub fn spectrum(&self, samples: &[Complex<T>]) -> Result<SpatialSpectrum<T>> {
        let mut buf = samples.to_vec();
        self.forward_x(&mut buf)?;
        Self::scale(&mut buf, self.grid.spatial_scale());
        Ok(SpatialSpectrum { values: buf })
    }

    pub fn samples(&self, spectrum: &SpatialSpectrum<T>) -> Result<Vec<Complex<T>>> {
        spectrum.check(&self.grid)?;
        let mut buf = spectrum.values.clone();
        Self::scale(&mut buf, T::one() / self.grid.spatial_scale());
        self.inverse_x(&mut buf)?;
        Ok(buf)
    }

    pub fn spectral_field(&self, field: &SpaceTimeField<T>) -> Result<SpectralField<T>> {
        field.check(&self.grid)?;
        let mut buf = field.values.clone();
        self.forward_xt(&mut buf)?;
        Self::scale(&mut buf, self.grid.spacetime_scale());
        Ok(SpectralField {
            nx: field.nx,
            nt: field.nt,
            values: buf,
        })
    }

    pub fn spacetime_field(&self, field: &SpectralField<T>) -> Result<SpaceTimeField<T>> {
        field.check(&self.grid)?;
        let mut buf = field.values.clone();
        Self::scale(&mut buf, T::one() / self.grid.spacetime_scale());
        self.inverse_xt(&mut buf)?;
        Ok(SpaceTimeField {
            nx: field.nx,
            nt: field.nt,
            values: buf,
        })
    }

    /// Forward then inverse transform; the identity up to rounding.
    pub fn roundtrip<D: Transformable<T>>(&self, data: &D) -> Result<D> {
        data.roundtrip_with(self)
    }
}

/// Data that can be pushed through the unitary DFT and back.
pub trait Transformable<T: Scalar>: Sized {
    fn roundtrip_with(&self, dft: &Dft<T>) -> Result<Self>;
}

impl<T: Scalar> Transformable<T> for SpatialSpectrum<T> {
    fn roundtrip_with(&self, dft: &Dft<T>) -> Result<Self> {
        self.check(dft.grid())?;
        let mut buf = self.values.clone();
        dft.forward_x(&mut buf)?;
        dft.inverse_x(&mut buf)?;
        Ok(Self { values: buf })
    }
}

impl<T: Scalar> Transformable<T> for SpectralField<T> {
    fn roundtrip_with(&self, dft: &Dft<T>) -> Result<Self> {
        self.check(dft.grid())?;
        let mut buf = self.values.clone();
        dft.forward_xt(&mut buf)?;
        dft.inverse_xt(&mut buf)?;
        Ok(Self {
            nx: self.nx,
            nt: self.nt,
            values: buf,
        })
    }
}

/// `U(t)û₀`: multiplies mode `ξ_k` by `e^{itφ(ξ_k)}`.
pub fn free_evolve<T: Scalar>(
    u0_hat: &SpatialSpectrum<T>,
    t: T,
    params: &PhaseParams<T>,
    grid: &SpaceTimeGrid<T>,
) -> Result<SpatialSpectrum<T>> {
    u0_hat.check(grid)?;
    if !t.is_finite() {
        return Err(LabError::param("t", "must be finite"));
    }
    let values = u0_hat
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex::from_polar(T::one(), t * params.phase(grid.xi(i))))
        .collect();
    Ok(SpatialSpectrum { values })
}

/// `(Σ_k <ξ_k>^{2s} |û_k|² · 2π/L)^{1/2}` with `<ξ> = 1 + |ξ|`.
pub fn sobolev_norm<T: Scalar>(u_hat: &SpatialSpectrum<T>, s: T, grid: &SpaceTimeGrid<T>) -> T {
    let sum: T = u_hat
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| grid.xi(i).bracket().powf(s + s) * z.norm_sqr())
        .sum();
    (sum * grid.dxi()).sqrt()
}

/// `(h Σ_j |u_j|²)^{1/2}`.
pub fn l2_norm_samples<T: Scalar>(samples: &[Complex<T>], grid: &SpaceTimeGrid<T>) -> T {
    let sum: T = samples.iter().map(|z| z.norm_sqr()).sum();
    (sum * grid.dx()).sqrt()
}

/// `(h·dt Σ |u|²)^{1/2}` over the whole space-time box.
pub fn l2_norm_spacetime<T: Scalar>(field: &SpaceTimeField<T>, grid: &SpaceTimeGrid<T>) -> T {
    let sum: T = field.values.iter().map(|z| z.norm_sqr()).sum();
    (sum * grid.dx() * grid.dt()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SpaceTimeGrid<f64> {
        SpaceTimeGrid::new(100.0, 64, 16.0, 32).unwrap()
    }

    fn random_samples(n: usize, seed: u64) -> Vec<Complex<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn phase_symbol_examples() {
        let p = PhaseParams::new(0.3, -2.0, Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(phase_symbol(0.0, &p), 0.0);
        let p = PhaseParams::new(0.0, 1.0, Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(phase_symbol(1.0, &p), 1.0);
        let p = PhaseParams::new(1.0, 1.0, Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(phase_symbol(2.0, &p), 12.0);
        assert_eq!(phase_symbol(2.0f32, &PhaseParams::cubic(Complex::new(1.0, 0.0))), 8.0);
    }

    #[test]
    fn beta_zero_rejected() {
        assert!(PhaseParams::new(1.0, 0.0, Complex::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn phase_difference_matches_direct() {
        let p = PhaseParams::new(0.7, 1.3, Complex::new(1.0, 0.0)).unwrap();
        for &(u, v) in &[(3.0f64, 2.5f64), (-1.0, 4.0), (100.0, 100.01)] {
            let direct = p.phase(u) - p.phase(v);
            assert!((p.phase_difference(u, v) - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SpaceTimeGrid::new(10.0, 12, 1.0, 8).is_err());
        assert!(SpaceTimeGrid::new(10.0, 4, 1.0, 8).is_err());
        assert!(SpaceTimeGrid::new(-1.0, 8, 1.0, 8).is_err());
        let g = grid();
        assert_eq!(SpaceTimeGrid::<f64>::signed_index(33, 64), -31);
        assert_eq!(SpaceTimeGrid::<f64>::fft_slot(-31, 64), 33);
        assert_eq!(g.t_nodes()[16], 0.0);
    }

    #[test]
    fn zero_roundtrip_is_zero() {
        let g = grid();
        let dft = Dft::new(&g);
        let z = SpectralField::zeros(g.nx, g.nt);
        assert_eq!(dft.roundtrip(&z).unwrap(), z);
    }

    #[test]
    fn single_mode_concentrates() {
        let g = grid();
        let dft = Dft::new(&g);
        let x = g.x_nodes();
        let xi1 = g.xi(1);
        let mut buf: Vec<_> = x.iter().map(|&x| Complex::from_polar(1.0, xi1 * x)).collect();
        let l2 = buf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        dft.forward_x(&mut buf).unwrap();
        assert!((buf[1].norm() - l2).abs() < 1e-12);
        for (i, z) in buf.iter().enumerate() {
            if i != 1 {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_roundtrip_and_parseval() {
        let g = grid();
        let dft = Dft::new(&g);
        let f = SpectralField {
            nx: g.nx,
            nt: g.nt,
            values: random_samples(g.nx * g.nt, 3),
        };
        let back = dft.roundtrip(&f).unwrap();
        let err = f
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        let mut buf = f.values.clone();
        dft.forward_xt(&mut buf).unwrap();
        let e0: f64 = f.values.iter().map(|z| z.norm_sqr()).sum();
        let e1: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        assert!((e0 - e1).abs() < 1e-12 * e0);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let g = grid();
        let dft = Dft::new(&g);
        let bad = SpatialSpectrum::<f64>::zeros(g.nx + 8);
        assert!(matches!(dft.roundtrip(&bad), Err(LabError::DimensionMismatch { .. })));
    }

    #[test]
    fn f32_roundtrip() {
        let g = SpaceTimeGrid::<f32>::new(10.0, 16, 4.0, 8).unwrap();
        let dft = Dft::new(&g);
        let s = SpatialSpectrum {
            values: (0..16).map(|i| Complex::new(i as f32, 1.0)).collect(),
        };
        let back = dft.roundtrip(&s).unwrap();
        for (a, b) in s.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-4);
        }
    }

    #[test]
    fn free_evolve_examples() {
        let g = grid();
        let p = PhaseParams::cubic(Complex::new(1.0, 0.0));
        let mut u0 = SpatialSpectrum::zeros(g.nx);
        u0.values[3] = Complex::new(0.5, -0.2);
        assert_eq!(free_evolve(&u0, 0.0, &p, &g).unwrap(), u0);

        // δ at ξ = 1: choose L = 2π so that slot 1 sits at ξ = 1.
        let g1 = SpaceTimeGrid::new(std::f64::consts::TAU, 16, 4.0, 8).unwrap();
        let mut d = SpatialSpectrum::zeros(16);
        d.values[1] = Complex::new(1.0, 0.0);
        let out = free_evolve(&d, std::f64::consts::PI, &p, &g1).unwrap();
        assert!((out.values[1] - Complex::new(-1.0, 0.0)).norm() < 1e-14);
        for s in [-0.5, 0.0, 1.0] {
            assert!((sobolev_norm(&out, s, &g1) - sobolev_norm(&d, s, &g1)).abs() < 1e-14);
        }
    }

    #[test]
    fn sobolev_examples() {
        let g = grid();
        assert_eq!(sobolev_norm(&SpatialSpectrum::zeros(g.nx), 0.3, &g), 0.0);
        // Single mode of amplitude A at ξ = 3 (L = 2π puts slot 3 there).
        let g3 = SpaceTimeGrid::new(std::f64::consts::TAU, 16, 4.0, 8).unwrap();
        let mut u = SpatialSpectrum::zeros(16);
        let a = 2.5;
        u.values[3] = Complex::new(0.0, a);
        let expected = a * 4.0 * (std::f64::consts::TAU / g3.length).sqrt();
        assert!((sobolev_norm(&u, 1.0, &g3) - expected).abs() < 1e-13);
    }

    #[test]
    fn sobolev_zero_is_physical_l2() {
        let g = grid();
        let dft = Dft::new(&g);
        let u = random_samples(g.nx, 9);
        let spec = dft.spectrum(&u).unwrap();
        let a = sobolev_norm(&spec, 0.0, &g);
        let b = l2_norm_samples(&u, &g);
        assert!((a - b).abs() < 1e-12 * b);
        let back = dft.samples(&spec).unwrap();
        assert!(u.iter().zip(&back).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn spacetime_parseval_physical() {
        let g = grid();
        let dft = Dft::new(&g);
        let f = SpaceTimeField {
            nx: g.nx,
            nt: g.nt,
            values: random_samples(g.nx * g.nt, 5),
        };
        let spec = dft.spectral_field(&f).unwrap();
        let lhs = (spec.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_area()).sqrt();
        let rhs = l2_norm_spacetime(&f, &g);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }
}
