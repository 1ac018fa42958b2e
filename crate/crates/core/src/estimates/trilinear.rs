//! Randomised direct search for the constant in
//! `‖u v w̄‖_{X^{s,b−1}} ≤ C ‖u‖_{X^{s,b}} ‖v‖_{X^{s,b}} ‖w‖_{X^{s,b}}`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::counterexample::{Counterexample, CounterexampleRatio, Resolution};
use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{Dft, PhaseParams, SpaceTimeField, SpaceTimeGrid, SpectralField};
use crate::xsb::xsb_norm;

/// Families the random ensemble draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Gaussian coefficients in a modulation band around the curve.
    Gaussian,
    /// A wave packet localised in `ξ` and in modulation.
    Packet,
    /// Indicator of a thin slab along the curve.
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub index: usize,
    pub kinds: [FieldKind; 3],
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrilinearReport {
    pub s: f64,
    pub b: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub witness: Witness,
}

impl TrilinearReport {
    /// Maximum over the first `k` triples.
    pub fn prefix_max(&self, k: usize) -> f64 {
        self.ratios[..k.min(self.ratios.len())]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Modes with `|ξ| ≤ ξ_max/3` and `|τ| ≤ τ_max/3`, so that cubic products do
/// not alias on the periodic grid.
struct Support<T> {
    xi_lim: T,
    tau_lim: T,
}

impl<T: Scalar> Support<T> {
    fn new(grid: &SpaceTimeGrid<T>) -> Self {
        let three = T::lit(3.0);
        Self {
            xi_lim: grid.xi_max() / three,
            tau_lim: T::from_usize_lossy(grid.nt / 2) * grid.dtau() / three,
        }
    }

    fn contains(&self, xi: T, tau: T) -> bool {
        xi.abs() < self.xi_lim && tau.abs() < self.tau_lim
    }
}

fn random_field<T: Scalar>(
    kind: FieldKind,
    rng: &mut ChaCha8Rng,
    grid: &SpaceTimeGrid<T>,
    params: &PhaseParams<T>,
    sup: &Support<T>,
) -> SpectralField<T> {
    let lim = sup.xi_lim.to_f64_lossy();
    let dxi = grid.dxi().to_f64_lossy();
    let zero = Complex::new(T::zero(), T::zero());
    match kind {
        FieldKind::Gaussian => {
            let band = rng.gen_range(0.5..3.0);
            let width = rng.gen_range(0.2..1.0) * lim;
            SpectralField::from_fn(grid.nx, grid.nt, |k, m| {
                let (xi, tau) = (grid.xi(k), grid.tau(m));
                let sigma = (tau - params.phase(xi)).to_f64_lossy();
                let x = xi.to_f64_lossy();
                if !sup.contains(xi, tau) || sigma.abs() > band {
                    return zero;
                }
                let env = (-(x / width).powi(2)).exp();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re * env), T::lit(im * env))
            })
        }
        FieldKind::Packet => {
            let xi0 = rng.gen_range(-0.8..0.8) * lim;
            let s0 = rng.gen_range(-1.0..1.0);
            let wx = rng.gen_range(2.0 * dxi..(0.3 * lim).max(3.0 * dxi));
            let ws = rng.gen_range(0.3..2.0);
            let len = grid.length.to_f64_lossy();
            let span = grid.t_span.to_f64_lossy();
            let x0 = rng.gen_range(-0.25..0.25) * len;
            let t0 = rng.gen_range(-0.125..0.125) * span;
            SpectralField::from_fn(grid.nx, grid.nt, |k, m| {
                let (xi, tau) = (grid.xi(k), grid.tau(m));
                if !sup.contains(xi, tau) {
                    return zero;
                }
                let x = xi.to_f64_lossy();
                let sigma = (tau - params.phase(xi)).to_f64_lossy();
                let env = (-((x - xi0) / wx).powi(2) - ((sigma - s0) / ws).powi(2)).exp();
                let ph = -(x * x0 + tau.to_f64_lossy() * t0);
                Complex::from_polar(T::lit(env), T::lit(ph))
            })
        }
        FieldKind::Bump => {
            let n0 = rng.gen_range(-0.8..0.6) * lim;
            let width = rng.gen_range(2..7) as f64 * dxi;
            SpectralField::from_fn(grid.nx, grid.nt, |k, m| {
                let (xi, tau) = (grid.xi(k), grid.tau(m));
                let x = xi.to_f64_lossy();
                let sigma = (tau - params.phase(xi)).abs();
                if sup.contains(xi, tau) && x >= n0 && x <= n0 + width && sigma <= T::one() {
                    Complex::new(T::one(), T::zero())
                } else {
                    zero
                }
            })
        }
    }
}

fn product<T: Scalar>(
    u: &SpaceTimeField<T>,
    v: &SpaceTimeField<T>,
    w: &SpaceTimeField<T>,
) -> SpaceTimeField<T> {
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .zip(&w.values)
        .map(|((a, b), c)| a * b * c.conj())
        .collect();
    SpaceTimeField {
        nx: u.nx,
        nt: u.nt,
        values,
    }
}

const KINDS: [FieldKind; 3] = [FieldKind::Gaussian, FieldKind::Packet, FieldKind::Bump];

/// Evaluates `‖uvw̄‖_{X^{s,b−1}} / Π‖·‖_{X^{s,b}}` over `ensemble_size`
/// random triples. Triple `i` is generated from its own random stream, so
/// the first `k` ratios do not depend on `ensemble_size`. Every fourth
/// triple is coherent (`u = v = w`) to probe self-interaction.
pub fn trilinear_ratio_search<T: Scalar>(
    s: T,
    b: T,
    ensemble_size: usize,
    grid: &SpaceTimeGrid<T>,
    params: &PhaseParams<T>,
    seed: u64,
) -> Result<TrilinearReport> {
    if ensemble_size == 0 {
        return Err(LabError::param("ensemble_size", "must be positive"));
    }
    let dft = Dft::new(grid);
    let sup = Support::new(grid);
    let b1 = b - T::one();
    let ratios: Vec<(f64, [FieldKind; 3])> = (0..ensemble_size)
        .into_par_iter()
        .map(|i| -> Result<(f64, [FieldKind; 3])> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let coherent = i % 4 == 3;
            let mut kinds = [FieldKind::Gaussian; 3];
            let mut fields: Vec<SpectralField<T>> = Vec::with_capacity(3);
            let mut norms = [T::zero(); 3];
            for j in 0..3 {
                if coherent && j > 0 {
                    kinds[j] = kinds[0];
                    norms[j] = norms[0];
                    fields.push(fields[0].clone());
                    continue;
                }
                // Redraw until nonzero; zero fields leave the ratio undefined.
                loop {
                    let kind = KINDS[rng.gen_range(0..3)];
                    let f = random_field(kind, &mut rng, grid, params, &sup);
                    let n = xsb_norm(&f, s, b, params, grid)?;
                    if n > T::zero() {
                        kinds[j] = kind;
                        norms[j] = n;
                        fields.push(f);
                        break;
                    }
                }
            }
            let phys: Vec<SpaceTimeField<T>> = fields
                .iter()
                .map(|f| dft.spacetime_field(f))
                .collect::<Result<_>>()?;
            let prod = dft.spectral_field(&product(&phys[0], &phys[1], &phys[2]))?;
            let num = xsb_norm(&prod, s, b1, params, grid)?;
            Ok(((num / (norms[0] * norms[1] * norms[2])).to_f64_lossy(), kinds))
        })
        .collect::<Result<_>>()?;
    let (index, &(max_ratio, kinds)) = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty ensemble");
    Ok(TrilinearReport {
        s: s.to_f64_lossy(),
        b: b.to_f64_lossy(),
        ratios: ratios.iter().map(|r| r.0).collect(),
        max_ratio,
        witness: Witness {
            index,
            kinds,
            ratio: max_ratio,
        },
    })
}

/// Counterexample ratios of the slab family at each `N`.
pub fn bump_family_ratios<T: Scalar>(
    s: T,
    b: T,
    ns: &[f64],
    res: &Resolution,
    params: &PhaseParams<T>,
) -> Result<Vec<CounterexampleRatio>> {
    ns.par_iter()
        .map(|&n| Ok(Counterexample::build(T::lit(n), res, params)?.ratio(s, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_prefix_is_independent_of_size() {
        let grid = SpaceTimeGrid::new(16.0 * std::f64::consts::PI, 32, 32.0 * std::f64::consts::PI, 128).unwrap();
        let p = PhaseParams::cubic(Complex::new(1.0, 0.0));
        let a = trilinear_ratio_search(0.0, 0.75, 8, &grid, &p, 3).unwrap();
        let b = trilinear_ratio_search(0.0, 0.75, 16, &grid, &p, 3).unwrap();
        assert_eq!(a.ratios[..], b.ratios[..8]);
        assert!(a.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    }
}
