//! Discrete `X^{s,b}` norms and smooth time cut-offs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{
    free_evolve, sobolev_norm, Dft, PhaseParams, SpaceTimeField, SpaceTimeGrid, SpatialSpectrum,
    SpectralField,
};

/// Regularity indices of an `X^{s,b}` estimate.
///
/// `b_prime` is the index on the forcing side of the Duhamel estimate and
/// `rho = −s` is the decay exponent used by the resonance integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XsbIndex<T> {
    pub s: T,
    pub b: T,
    pub b_prime: T,
    pub rho: T,
}

impl<T: Scalar> XsbIndex<T> {
    /// Builds the index with the default `b′ = b − 1 + 0.1`.
    pub fn new(s: T, b: T) -> Self {
        Self::with_b_prime(s, b, b - T::one() + T::lit(0.1))
    }

    pub fn with_b_prime(s: T, b: T, b_prime: T) -> Self {
        let rho = if s <= T::zero() { -s } else { T::zero() };
        Self { s, b, b_prime, rho }
    }

    /// `ε = 1 − b + b′`, the power of `T` gained by the Duhamel estimate.
    pub fn epsilon(&self) -> T {
        T::one() - self.b + self.b_prime
    }

    /// Range of the trilinear estimate: `−1/4 < s ≤ 0`, `7/12 < b < 11/12`.
    pub fn validate_trilinear(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let s = self.s.to_f64_lossy();
        let b = self.b.to_f64_lossy();
        if !(s > -0.25 && s <= 0.0) {
            errs.push(format!("s = {s} outside the trilinear range -1/4 < s <= 0"));
        }
        if !(b > 7.0 / 12.0 && b < 11.0 / 12.0) {
            errs.push(format!("b = {b} outside the trilinear range 7/12 < b < 11/12"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Range of the Duhamel estimate: `−1/2 < b′ ≤ 0 ≤ b ≤ b′ + 1`.
    pub fn validate_duhamel(&self) -> std::result::Result<(), Vec<String>> {
        let b = self.b.to_f64_lossy();
        let bp = self.b_prime.to_f64_lossy();
        if bp > -0.5 && bp <= 0.0 && b >= 0.0 && b <= bp + 1.0 {
            Ok(())
        } else {
            Err(vec![format!(
                "(b, b') = ({b}, {bp}) outside the Duhamel range -1/2 < b' <= 0 <= b <= b'+1"
            )])
        }
    }
}

/// `( Σ_{k,m} <ξ_k>^{2s} <τ_m − φ(ξ_k)>^{2b} |F_{k,m}|² · cellArea )^{1/2}`.
pub fn xsb_norm<T: Scalar>(
    field: &SpectralField<T>,
    s: T,
    b: T,
    params: &PhaseParams<T>,
    grid: &SpaceTimeGrid<T>,
) -> Result<T> {
    field.check(grid)?;
    let xi_weights: Vec<(T, T)> = (0..grid.nx)
        .map(|k| {
            let xi = grid.xi(k);
            (xi.bracket().powf(s + s), params.phase(xi))
        })
        .collect();
    let mut sum = T::zero();
    for m in 0..grid.nt {
        let tau = grid.tau(m);
        let row = &field.values[m * grid.nx..(m + 1) * grid.nx];
        for (z, &(wx, ph)) in row.iter().zip(&xi_weights) {
            let mag = z.norm_sqr();
            if mag > T::zero() {
                sum = sum + wx * (tau - ph).bracket().powf(b + b) * mag;
            }
        }
    }
    Ok((sum * grid.cell_area()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    SmoothBump,
    None,
}

/// `ψ_T(t) = ψ(t/T)` with `ψ = 1` on `[−1, 1]` and `ψ = 0` outside `(−2, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow<T> {
    pub kind: WindowKind,
    pub scale: T,
}

/// `e^{−1/x}` for `x > 0`, else 0.
fn glue<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        (-T::one() / x).exp()
    } else {
        T::zero()
    }
}

/// Smooth cut-off: exactly one for `|t| ≤ 1`, exactly zero for `|t| ≥ 2`.
pub fn psi<T: Scalar>(t: T) -> T {
    let a = t.abs();
    if a <= T::one() {
        return T::one();
    }
    if a >= T::lit(2.0) {
        return T::zero();
    }
    let up = glue(T::lit(2.0) - a);
    up / (up + glue(a - T::one()))
}

impl<T: Scalar> TimeWindow<T> {
    pub fn smooth(scale: T) -> Self {
        Self {
            kind: WindowKind::SmoothBump,
            scale,
        }
    }

    pub fn none() -> Self {
        Self {
            kind: WindowKind::None,
            scale: T::one(),
        }
    }

    pub fn value(&self, t: T) -> T {
        match self.kind {
            WindowKind::None => T::one(),
            WindowKind::SmoothBump => psi(t / self.scale),
        }
    }

    pub fn check(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
        if self.kind == WindowKind::None {
            return Ok(());
        }
        let max = grid.t_span / T::lit(4.0);
        if !(self.scale > T::zero() && self.scale <= max) {
            return Err(LabError::param(
                "window scale",
                format!(
                    "T = {} must lie in (0, T_span/4 = {}] for the window to fit the time box",
                    self.scale, max
                ),
            ));
        }
        Ok(())
    }
}

/// Multiplies every time slice `t_j` by `ψ_T(t_j)`.
pub fn apply_time_window<T: Scalar>(
    u: &SpaceTimeField<T>,
    w: &TimeWindow<T>,
    grid: &SpaceTimeGrid<T>,
) -> Result<SpaceTimeField<T>> {
    u.check(grid)?;
    w.check(grid)?;
    let mut out = u.clone();
    if w.kind == WindowKind::None {
        return Ok(out);
    }
    for (j, t) in grid.t_nodes().into_iter().enumerate() {
        let c = w.value(t);
        out.values[j * grid.nx..(j + 1) * grid.nx]
            .iter_mut()
            .for_each(|z| *z = *z * c);
    }
    Ok(out)
}

/// Samples `ψ₁(t) U(t) u₀` on the space-time grid.
pub fn windowed_free_solution<T: Scalar>(
    u0_hat: &SpatialSpectrum<T>,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
) -> Result<SpaceTimeField<T>> {
    let grid = *dft.grid();
    let window = TimeWindow::smooth(T::one());
    window.check(&grid)?;
    let mut values = Vec::with_capacity(grid.nx * grid.nt);
    for t in grid.t_nodes() {
        let c = window.value(t);
        if c == T::zero() {
            values.extend(std::iter::repeat_n(Complex::new(T::zero(), T::zero()), grid.nx));
            continue;
        }
        let snap = dft.samples(&free_evolve(u0_hat, t, params, &grid)?)?;
        values.extend(snap.into_iter().map(|z| z * c));
    }
    Ok(SpaceTimeField {
        nx: grid.nx,
        nt: grid.nt,
        values,
    })
}

/// `‖ψ₁(t)U(t)u₀‖_{X^{s,b}} / ‖u₀‖_{H^s}`; the linear estimate says this is a
/// constant depending only on `ψ` and `b`.
pub fn linear_estimate_ratio<T: Scalar>(
    u0_hat: &SpatialSpectrum<T>,
    s: T,
    b: T,
    params: &PhaseParams<T>,
    dft: &Dft<T>,
) -> Result<T> {
    let grid = *dft.grid();
    let denom = sobolev_norm(u0_hat, s, &grid);
    if denom == T::zero() {
        return Err(LabError::Precondition("u0 must be nonzero".into()));
    }
    let field = dft.spectral_field(&windowed_free_solution(u0_hat, params, dft)?)?;
    Ok(xsb_norm(&field, s, b, params, &grid)? / denom)
}
