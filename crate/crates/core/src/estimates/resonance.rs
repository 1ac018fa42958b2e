//! The resonance integral `I(ξ, y)` controlling the trilinear estimate, its
//! rescaled form, the auxiliary integrals `J₁`, `J₂`, and the scans built on
//! them.

use rayon::prelude::*;
use serde::Serialize;

use super::iterated::{integrate_region, Annulus, IterTol, Kernel, Quadratic};
use crate::error::{LabError, Result};
use crate::quadrature::{Integral, QuadSpec};
use crate::scalar::Scalar;
use crate::spectral::PhaseParams;

/// Integrand of `I(ξ, y)` together with its rescaled pieces.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceIntegrand<T> {
    pub rho: T,
    pub b: T,
    pub params: PhaseParams<T>,
}

impl<T: Scalar> ResonanceIntegrand<T> {
    pub fn new(rho: T, b: T, params: PhaseParams<T>) -> Result<Self> {
        if !(rho >= T::zero() && rho < T::lit(0.25)) {
            return Err(LabError::param("rho", format!("{rho} not in [0, 1/4)")));
        }
        if !(b > T::zero() && b < T::one()) {
            return Err(LabError::param("b", format!("{b} not in (0, 1)")));
        }
        Ok(Self { rho, b, params })
    }

    /// `α = 0, β = 1`.
    pub fn cubic(rho: T, b: T) -> Result<Self> {
        Self::new(rho, b, PhaseParams::cubic(num_complex::Complex::new(T::zero(), T::zero())))
    }

    fn is_pure_cubic(&self) -> bool {
        self.params.alpha == T::zero() && self.params.beta == T::one()
    }

    /// `g(ξ,ξ₁,ξ₂) = 3(ξ₁−ξ₂)(ξ−ξ₁)(ξ+ξ₂)`.
    pub fn g(xi: T, x1: T, x2: T) -> T {
        T::lit(3.0) * (x1 - x2) * (xi - x1) * (xi + x2)
    }

    /// Full resonance `φ(ξ) − φ(ξ−ξ₁+ξ₂) − φ(−ξ₂) + φ(−ξ₁)`, factored as
    /// `(ξ₁−ξ₂)(ξ+ξ₂)(3β(ξ−ξ₁) + 2α)`; equals `g` for `α = 0, β = 1`.
    pub fn resonance(&self, xi: T, x1: T, x2: T) -> T {
        if self.is_pure_cubic() {
            return Self::g(xi, x1, x2);
        }
        let k = T::lit(3.0) * self.params.beta * (xi - x1) + T::lit(2.0) * self.params.alpha;
        (x1 - x2) * (xi + x2) * k
    }

    /// `G_ρ(ξ,−ξ₁,−ξ₂) = <ξ−ξ₁+ξ₂>^{2ρ} <ξ₁>^{2ρ} <ξ₂>^{2ρ}`.
    pub fn weight(&self, xi: T, x1: T, x2: T) -> T {
        if self.rho == T::zero() {
            return T::one();
        }
        ((xi - x1 + x2).bracket() * x1.bracket() * x2.bracket()).powf(self.rho + self.rho)
    }

    /// Integrand of `I(ξ, y)` without the prefactor.
    pub fn direct(&self, xi: T, y: T, x1: T, x2: T) -> T {
        self.weight(xi, x1, x2) / (y + self.resonance(xi, x1, x2)).bracket().powf(self.b + self.b)
    }

    /// `1 / (<ξ>^{2ρ} <y>^{2(1−b)})`.
    pub fn prefactor(&self, xi: T, y: T) -> T {
        let two = T::lit(2.0);
        xi.bracket().powf(-two * self.rho) * y.bracket().powf(-two * (T::one() - self.b))
    }

    /// `F(u₁,u₂) = (2 − u₁ − u₂) u₁ u₂`.
    pub fn f_rescaled(u1: T, u2: T) -> T {
        (T::lit(2.0) - u1 - u2) * u1 * u2
    }

    /// `H_ρ = <ξ(u₁+u₂−1)>^{2ρ} <ξ(1−u₁)>^{2ρ} <ξ(u₂−1)>^{2ρ}`, the weight in
    /// the coordinates `ξ₁ = ξ(1−u₁)`, `ξ₂ = ξ(u₂−1)`.
    pub fn h_rho(&self, xi: T, u1: T, u2: T) -> T {
        if self.rho == T::zero() {
            return T::one();
        }
        let one = T::one();
        ((xi * (u1 + u2 - one)).bracket() * (xi * (one - u1)).bracket() * (xi * (u2 - one)).bracket())
            .powf(self.rho + self.rho)
    }

    /// `p(ξ,z) = ξ² / (<ξ³z>^{2(1−b)} <ξ>^{2ρ})`.
    pub fn p(&self, xi: T, z: T) -> T {
        xi * xi * self.prefactor(xi, xi * xi * xi * z)
    }

    /// Integrand of the rescaled form: `H_ρ / <ξ³(z + 3βF)>^{2b}`. With the
    /// Jacobian `ξ²` of the change of variables the rescaled integral equals
    /// the direct one exactly.
    pub fn rescaled(&self, xi: T, z: T, u1: T, u2: T) -> T {
        let a = xi * xi * xi;
        let q = z + T::lit(3.0) * self.params.beta * Self::f_rescaled(u1, u2);
        self.h_rho(xi, u1, u2) / (a * q).bracket().powf(self.b + self.b)
    }

    /// `l² = (u₁−2)²/4 + z/u₁`, so that `|z+F| = |u₁|·|(u₂+(u₁−2)/2)² − l²|`.
    pub fn l_squared(u1: T, z: T) -> T {
        let d = u1 - T::lit(2.0);
        d * d / T::lit(4.0) + z / u1
    }

    /// `c(ρ) = (2+4ρ)/3`.
    pub fn c_rho(&self) -> T {
        (T::lit(2.0) + T::lit(4.0) * self.rho) / T::lit(3.0)
    }

    /// Shell-increment exponents at large radius: the bulk exponent and the
    /// exponent of the strips along the zero lines of the resonance.
    fn tail_exponents(&self) -> [T; 2] {
        let six = T::lit(6.0);
        let bulk = T::lit(2.0) + six * self.rho - six * self.b;
        let lines = T::lit(4.0) * self.rho + (-T::one()).max(T::lit(2.0) - six * self.b);
        [bulk, lines]
    }
}

/// Integration order for the direct form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `ξ₁` outside, `ξ₂` inside.
    Natural,
    /// `ξ₂` outside, `ξ₁` inside.
    Swapped,
}

/// Which representation of `I(ξ, y)` to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Direct(Order),
    Rescaled,
    /// Rescaled for `|ξ| > 1` with `α = 0`, direct otherwise.
    Auto,
}

struct DirectKernel<T> {
    ri: ResonanceIntegrand<T>,
    xi: T,
    y: T,
}

impl<T: Scalar> Kernel<T> for DirectKernel<T> {
    fn value(&self, x1: T, x2: T) -> T {
        self.ri.direct(self.xi, self.y, x1, x2)
    }
    fn inner_quadratic(&self, x1: T) -> Quadratic<T> {
        let k = T::lit(3.0) * self.ri.params.beta * (self.xi - x1) + T::lit(2.0) * self.ri.params.alpha;
        Quadratic {
            amp: T::one(),
            q2: -k,
            q1: k * (x1 - self.xi),
            q0: self.y + k * x1 * self.xi,
        }
    }
    fn inner_kinks(&self, x1: T, out: &mut Vec<T>) {
        out.extend([T::zero(), x1 - self.xi]);
    }
    fn outer_points(&self, out: &mut Vec<T>) {
        let p = self.ri.params;
        out.extend([
            T::zero(),
            self.xi,
            -self.xi,
            self.xi + T::lit(2.0) * p.alpha / (T::lit(3.0) * p.beta),
        ]);
    }
}

struct SwappedKernel<T> {
    ri: ResonanceIntegrand<T>,
    xi: T,
    y: T,
}

impl<T: Scalar> Kernel<T> for SwappedKernel<T> {
    fn value(&self, x2: T, x1: T) -> T {
        self.ri.direct(self.xi, self.y, x1, x2)
    }
    fn inner_quadratic(&self, x2: T) -> Quadratic<T> {
        let p = self.ri.params;
        let three_b = T::lit(3.0) * p.beta;
        let c = three_b * self.xi + T::lit(2.0) * p.alpha;
        let m = self.xi + x2;
        Quadratic {
            amp: T::one(),
            q2: -three_b * m,
            q1: m * (c + three_b * x2),
            q0: self.y - m * x2 * c,
        }
    }
    fn inner_kinks(&self, x2: T, out: &mut Vec<T>) {
        out.extend([T::zero(), self.xi + x2]);
    }
    fn outer_points(&self, out: &mut Vec<T>) {
        out.extend([T::zero(), -self.xi, self.xi]);
    }
}

struct RescaledKernel<T> {
    ri: ResonanceIntegrand<T>,
    xi: T,
    z: T,
}

impl<T: Scalar> Kernel<T> for RescaledKernel<T> {
    fn value(&self, u1: T, u2: T) -> T {
        self.ri.rescaled(self.xi, self.z, u1, u2)
    }
    fn inner_quadratic(&self, u1: T) -> Quadratic<T> {
        let three_b = T::lit(3.0) * self.ri.params.beta;
        Quadratic {
            amp: self.xi * self.xi * self.xi,
            q2: -three_b * u1,
            q1: three_b * u1 * (T::lit(2.0) - u1),
            q0: self.z,
        }
    }
    fn inner_kinks(&self, u1: T, out: &mut Vec<T>) {
        out.extend([T::one(), T::one() - u1]);
    }
    fn outer_points(&self, out: &mut Vec<T>) {
        out.extend([T::zero(), T::one(), T::lit(2.0)]);
    }
}

/// Which auxiliary integral a [`PropKernel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxIntegral {
    /// `J₁ = ξ^{2+4ρ} ∫₀^∞ du₁ ∫ du₂ u₁^{4ρ} / <ξ³(z+F)>^{2b}`.
    J1,
    /// `J₂ = ξ^{2+4ρ} ∫∫ du₁ du₂ / <ξ³(z+F)>^{2b}`.
    J2,
}

struct PropKernel<T> {
    which: AuxIntegral,
    rho: T,
    b: T,
    xi: T,
    z: T,
}

impl<T: Scalar> Kernel<T> for PropKernel<T> {
    fn value(&self, u1: T, u2: T) -> T {
        let a = self.xi * self.xi * self.xi;
        let den = (a * (self.z + ResonanceIntegrand::f_rescaled(u1, u2)))
            .bracket()
            .powf(self.b + self.b);
        match self.which {
            AuxIntegral::J2 => T::one() / den,
            AuxIntegral::J1 => u1.abs().powf(T::lit(4.0) * self.rho) / den,
        }
    }
    fn inner_quadratic(&self, u1: T) -> Quadratic<T> {
        Quadratic {
            amp: self.xi * self.xi * self.xi,
            q2: -u1,
            q1: u1 * (T::lit(2.0) - u1),
            q0: self.z,
        }
    }
    fn inner_kinks(&self, _u1: T, _out: &mut Vec<T>) {}
    fn outer_points(&self, out: &mut Vec<T>) {
        out.extend([T::zero(), T::lit(2.0)]);
    }
}

/// Result of a truncated integral with its extrapolated tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailedValue {
    /// Truncated integral times its prefactor.
    pub truncated: f64,
    /// Estimated contribution from outside the last radius.
    pub tail: f64,
    /// `truncated + tail`.
    pub value: f64,
    /// Final truncation radius, in the integration variables.
    pub radius: f64,
    /// Log-log slope of the last shell increments.
    pub tail_slope: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
}

/// Least-squares slope of `ln y` against `ln x`.
pub(crate) fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let lx: Vec<f64> = x[..n].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y[..n].iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Tail beyond the last shell when increments behave like
/// `A·2^{κ₁k} + B·2^{κ₂k}` with known negative exponents.
fn extrapolate_tail(increments: &[f64], exps: [f64; 2]) -> f64 {
    let n = increments.len();
    let last = increments[n - 1];
    let q = |k: f64| 2f64.powf(k);
    let geometric = |k: f64| last * q(k) / (1.0 - q(k));
    let (k1, k2) = (exps[0].max(exps[1]), exps[0].min(exps[1]));
    if n < 2 || (k1 - k2).abs() < 0.05 || k2 < -6.0 {
        return geometric(k1);
    }
    // Solve for the two amplitudes from the last two increments.
    let (d0, d1) = (increments[n - 2], last);
    let (a1, a2) = (q(k1), q(k2));
    let det = a2 - a1;
    let big = (d0 * a2 - d1) / det;
    let small = (d1 - d0 * a1) / det;
    let tail = big * a1 * a1 / (1.0 - a1) + small * a2 * a2 / (1.0 - a2);
    if big >= 0.0 && tail >= 0.0 && tail.is_finite() {
        tail
    } else {
        geometric(k1)
    }
}

/// Integrates growing square annuli around `center` until the extrapolated
/// value settles.
fn shells<T: Scalar, K: Kernel<T>>(
    k: &K,
    center: (T, T),
    r0: T,
    outer_floor: Option<T>,
    exps: [T; 2],
    prefactor: f64,
    quad: &QuadSpec,
) -> Result<TailedValue> {
    let mut tol = IterTol::<T>::from_target(quad.tolerance);
    let mut region = Annulus {
        center,
        h_in: T::zero(),
        h_out: r0,
        outer_floor,
    };
    let first = integrate_region(k, &region, &tol);
    let mut total: Integral<T> = first;
    let mut radii = vec![r0.to_f64_lossy()];
    let mut increments: Vec<f64> = Vec::new();
    let exps = exps.map(|e| e.to_f64_lossy());
    let mut previous: Option<f64> = None;
    for _ in 0..quad.max_refinements.max(2) {
        region.h_in = region.h_out;
        region.h_out = region.h_out + region.h_out;
        tol.outer_abs = tol.outer_rel * total.value.abs();
        let shell = integrate_region(k, &region, &tol);
        total = total.combine(shell);
        increments.push(shell.value.to_f64_lossy());
        radii.push(region.h_out.to_f64_lossy());
        if increments.len() < 2 {
            continue;
        }
        let slope = log_slope(&radii[radii.len() - increments.len().min(3)..], &increments[increments.len() - increments.len().min(3)..]);
        let partial = total.value.to_f64_lossy();
        if !(slope < -0.02) {
            previous = None;
            continue;
        }
        let tail = extrapolate_tail(&increments, exps);
        let estimate = partial + tail;
        let settled = previous.is_some_and(|p| (estimate - p).abs() <= quad.tolerance * estimate);
        if tail <= quad.tolerance * partial || settled {
            return Ok(TailedValue {
                truncated: partial * prefactor,
                tail: tail * prefactor,
                value: estimate * prefactor,
                radius: region.h_out.to_f64_lossy(),
                tail_slope: slope,
                quadrature_error: total.error.to_f64_lossy() * prefactor,
                evaluations: total.evaluations,
            });
        }
        previous = Some(estimate);
    }
    let n = increments.len();
    let slope = log_slope(&radii[n.saturating_sub(2)..], &increments[n.saturating_sub(3)..]);
    Err(LabError::TailNotControlled {
        partial: total.value.to_f64_lossy() * prefactor,
        radius: region.h_out.to_f64_lossy(),
        tail_slope: slope,
    })
}

fn check_rho_b<T: Scalar>(rho: T, b: T) -> Result<()> {
    if !(rho >= T::zero() && rho < T::lit(0.25)) {
        return Err(LabError::Precondition(format!("rho = {rho} not in [0, 1/4)")));
    }
    if !(b > T::zero() && b < T::one()) {
        return Err(LabError::Precondition(format!("b = {b} not in (0, 1)")));
    }
    Ok(())
}

/// `I(ξ, y)` by shell-wise quadrature with tail extrapolation. The first box
/// has half-width `R·max(1, |ξ|, |y|^{1/3})`.
pub fn eval_i<T: Scalar>(
    ri: &ResonanceIntegrand<T>,
    xi: T,
    y: T,
    form: Form,
    quad: &QuadSpec,
) -> Result<TailedValue> {
    check_rho_b(ri.rho, ri.b)?;
    let r0 = T::lit(quad.truncation_radius) * T::one().max(xi.abs()).max(y.abs().cbrt());
    let pre = ri.prefactor(xi, y).to_f64_lossy();
    let exps = ri.tail_exponents();
    let form = match form {
        Form::Auto if xi.abs() > T::one() && ri.params.alpha == T::zero() => Form::Rescaled,
        Form::Auto => Form::Direct(Order::Natural),
        f => f,
    };
    match form {
        Form::Direct(Order::Natural) => shells(
            &DirectKernel { ri: *ri, xi, y },
            (T::zero(), T::zero()),
            r0,
            None,
            exps,
            pre,
            quad,
        ),
        Form::Direct(Order::Swapped) => shells(
            &SwappedKernel { ri: *ri, xi, y },
            (T::zero(), T::zero()),
            r0,
            None,
            exps,
            pre,
            quad,
        ),
        Form::Rescaled => {
            if ri.params.alpha != T::zero() {
                return Err(LabError::Precondition("the rescaled form needs alpha = 0".into()));
            }
            if xi == T::zero() {
                return Err(LabError::Precondition("the rescaled form needs xi != 0".into()));
            }
            let z = y / (xi * xi * xi);
            let jac = (xi * xi).to_f64_lossy();
            let mut v = shells(
                &RescaledKernel { ri: *ri, xi, z },
                (T::one(), T::one()),
                r0 / xi.abs(),
                None,
                exps,
                pre * jac,
                quad,
            )?;
            v.radius *= xi.abs().to_f64_lossy();
            Ok(v)
        }
        Form::Auto => unreachable!(),
    }
}

/// Truncated integral over the box `max(|ξ₁|, |ξ₂|) ≤ radius`, no tail.
pub fn eval_i_truncated<T: Scalar>(
    ri: &ResonanceIntegrand<T>,
    xi: T,
    y: T,
    radius: T,
    form: Form,
    quad: &QuadSpec,
) -> Result<f64> {
    check_rho_b(ri.rho, ri.b)?;
    let tol = IterTol::<T>::from_target(quad.tolerance);
    let pre = ri.prefactor(xi, y).to_f64_lossy();
    let boxed = |center: (T, T), h: T| Annulus {
        center,
        h_in: T::zero(),
        h_out: h,
        outer_floor: None,
    };
    let r = match form {
        Form::Direct(Order::Natural) | Form::Auto => {
            integrate_region(&DirectKernel { ri: *ri, xi, y }, &boxed((T::zero(), T::zero()), radius), &tol)
                .value
                .to_f64_lossy()
                * pre
        }
        Form::Direct(Order::Swapped) => {
            integrate_region(&SwappedKernel { ri: *ri, xi, y }, &boxed((T::zero(), T::zero()), radius), &tol)
                .value
                .to_f64_lossy()
                * pre
        }
        Form::Rescaled => {
            if ri.params.alpha != T::zero() || xi == T::zero() {
                return Err(LabError::Precondition("the rescaled form needs alpha = 0 and xi != 0".into()));
            }
            let z = y / (xi * xi * xi);
            integrate_region(
                &RescaledKernel { ri: *ri, xi, z },
                &boxed((T::one(), T::one()), radius / xi.abs()),
                &tol,
            )
            .value
            .to_f64_lossy()
                * pre
                * (xi * xi).to_f64_lossy()
        }
    };
    Ok(r)
}

/// Convergence regime of `I(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Convergent,
    Divergent,
    NearThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyVerdict {
    pub rho: f64,
    pub b: f64,
    pub regime: Regime,
    /// Log-log slope of the shell increments over the last three shells.
    pub tail_slope: f64,
    pub radii: Vec<f64>,
    /// Cumulative integrals over the boxes of half-width `radii[k]`.
    pub partial_integrals: Vec<f64>,
}

/// Classifies `I(0,0)` as convergent or divergent from the decay of
/// dyadic-shell increments over an increasing ladder of radii.
pub fn dichotomy_i00<T: Scalar>(rho: T, b: T, radii: &[f64], quad: &QuadSpec) -> Result<DichotomyVerdict> {
    check_rho_b(rho, b)?;
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(LabError::param("radii", "need at least three increasing positive radii"));
    }
    let ri = ResonanceIntegrand::cubic(rho, b)?;
    let k = DirectKernel {
        ri,
        xi: T::zero(),
        y: T::zero(),
    };
    let tol = IterTol::<T>::from_target(quad.tolerance);
    let pieces: Vec<f64> = (0..radii.len())
        .into_par_iter()
        .map(|i| {
            let region = Annulus {
                center: (T::zero(), T::zero()),
                h_in: if i == 0 { T::zero() } else { T::lit(radii[i - 1]) },
                h_out: T::lit(radii[i]),
                outer_floor: None,
            };
            integrate_region(&k, &region, &tol).value.to_f64_lossy()
        })
        .collect();
    let mut partial_integrals = Vec::with_capacity(pieces.len());
    let mut acc = 0.0;
    for p in &pieces {
        acc += p;
        partial_integrals.push(acc);
    }
    // Increments per unit log-radius, so non-dyadic ladders compare fairly.
    let inc: Vec<f64> = (1..radii.len())
        .map(|i| pieces[i] / (radii[i] / radii[i - 1]).ln())
        .collect();
    let mid: Vec<f64> = (1..radii.len()).map(|i| (radii[i] * radii[i - 1]).sqrt()).collect();
    let n = inc.len();
    let m = n.min(3);
    let tail_slope = log_slope(&mid[n - m..], &inc[n - m..]);
    let regime = if tail_slope > 0.02 {
        Regime::Divergent
    } else if tail_slope < -0.02 {
        Regime::Convergent
    } else {
        Regime::NearThreshold
    };
    Ok(DichotomyVerdict {
        rho: rho.to_f64_lossy(),
        b: b.to_f64_lossy(),
        regime,
        tail_slope,
        radii: radii.to_vec(),
        partial_integrals,
    })
}

/// One evaluated scan point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub xi: f64,
    pub z: f64,
    pub y: f64,
    pub value: Option<f64>,
    pub tail_slope: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rho: f64,
    pub b: f64,
    pub points: Vec<BoundPoint>,
    pub sup: f64,
    /// `(ξ, y)` of the supremum.
    pub argmax: (f64, f64),
    pub failures: usize,
    /// Points whose shell increments did not decay.
    pub diverging: usize,
}

impl BoundReport {
    fn collect(rho: f64, b: f64, points: Vec<BoundPoint>) -> Self {
        let mut sup = f64::NEG_INFINITY;
        let mut argmax = (f64::NAN, f64::NAN);
        let mut failures = 0;
        let mut diverging = 0;
        for p in &points {
            match p.value {
                Some(v) if v > sup => {
                    sup = v;
                    argmax = (p.xi, p.y);
                }
                Some(_) => {}
                None => {
                    failures += 1;
                    if p.tail_slope.is_some_and(|s| s >= -0.02) {
                        diverging += 1;
                    }
                }
            }
        }
        Self {
            rho,
            b,
            points,
            sup,
            argmax,
            failures,
            diverging,
        }
    }

    /// True when some point's tail failed to decay.
    pub fn unbounded(&self) -> bool {
        self.diverging > 0
    }
}

fn point_from(xi: f64, z: f64, y: f64, r: Result<TailedValue>) -> BoundPoint {
    match r {
        Ok(v) => BoundPoint {
            xi,
            z,
            y,
            value: Some(v.value),
            tail_slope: Some(v.tail_slope),
            error: None,
        },
        Err(e) => {
            let slope = match &e {
                LabError::TailNotControlled { tail_slope, .. } => Some(*tail_slope),
                _ => None,
            };
            BoundPoint {
                xi,
                z,
                y,
                value: None,
                tail_slope: slope,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Supremum of `I(ξ, ξ³z)` over a product grid. For `α = 0` the integral is
/// invariant under `(ξ, y) → (−ξ, −y)`, so callers may pass `ξ ≥ 0` only.
pub fn uniform_bound_scan<T: Scalar>(
    ri: &ResonanceIntegrand<T>,
    xi_grid: &[f64],
    z_grid: &[f64],
    quad: &QuadSpec,
) -> BoundReport {
    let tasks: Vec<(f64, f64)> = xi_grid
        .iter()
        .flat_map(|&xi| {
            // On ξ = 0 the substitution y = ξ³z collapses every z to y = 0.
            let zs: Vec<f64> = if xi == 0.0 { vec![0.0] } else { z_grid.to_vec() };
            zs.into_iter().map(move |z| (xi, z))
        })
        .collect();
    let points = tasks
        .into_par_iter()
        .map(|(xi, z)| {
            let y = xi * xi * xi * z;
            point_from(xi, z, y, eval_i(ri, T::lit(xi), T::lit(y), Form::Auto, quad))
        })
        .collect();
    BoundReport::collect(ri.rho.to_f64_lossy(), ri.b.to_f64_lossy(), points)
}

/// `J₁` or `J₂` at one `(ξ, z)`.
pub fn eval_j<T: Scalar>(which: AuxIntegral, rho: T, b: T, xi: T, z: T, quad: &QuadSpec) -> Result<TailedValue> {
    check_rho_b(rho, b)?;
    if xi == T::zero() {
        return Err(LabError::Precondition("J integrals need xi != 0".into()));
    }
    let k = PropKernel { which, rho, b, xi, z };
    let six = T::lit(6.0);
    let weight = match which {
        AuxIntegral::J1 => T::lit(4.0) * rho,
        AuxIntegral::J2 => T::zero(),
    };
    let exps = [
        T::lit(2.0) + weight - six * b,
        weight + (-T::one()).max(T::lit(2.0) - six * b),
    ];
    let pre = xi.abs().powf(T::lit(2.0) + T::lit(4.0) * rho).to_f64_lossy();
    let floor = match which {
        AuxIntegral::J1 => Some(T::zero()),
        AuxIntegral::J2 => None,
    };
    let r0 = T::lit(quad.truncation_radius) * T::one().max(z.abs().cbrt());
    shells(&k, (T::one(), T::one()), r0, floor, exps, pre, quad)
}

/// `J₁` and `J₂` over a list of `(ξ, z)`.
pub fn aux_integral_scan<T: Scalar>(
    which: AuxIntegral,
    rho: T,
    b: T,
    xi_list: &[f64],
    z_list: &[f64],
    quad: &QuadSpec,
) -> BoundReport {
    let tasks: Vec<(f64, f64)> = xi_list
        .iter()
        .flat_map(|&xi| z_list.iter().map(move |&z| (xi, z)))
        .collect();
    let points = tasks
        .into_par_iter()
        .map(|(xi, z)| {
            let y = xi * xi * xi * z;
            point_from(xi, z, y, eval_j(which, rho, b, T::lit(xi), T::lit(z), quad))
        })
        .collect();
    BoundReport::collect(rho.to_f64_lossy(), b.to_f64_lossy(), points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_matches_phase_combination() {
        let p = PhaseParams::<f64>::new(0.7, -1.3, num_complex::Complex::new(1.0, 0.0)).unwrap();
        let ri = ResonanceIntegrand::new(0.1, 0.7, p).unwrap();
        let (xi, x1, x2) = (0.9, -1.7, 2.3);
        let expect = p.phase(xi) - p.phase(xi - x1 + x2) - p.phase(-x2) + p.phase(-x1);
        assert!((ri.resonance(xi, x1, x2) - expect).abs() < 1e-12);
    }

    #[test]
    fn f_identity_with_l_squared() {
        let (u1, u2, z): (f64, f64, f64) = (0.7, -1.9, 0.4);
        let lhs = (z + ResonanceIntegrand::f_rescaled(u1, u2)).abs();
        let eta = u2 + (u1 - 2.0) / 2.0;
        let rhs = u1.abs() * (eta * eta - ResonanceIntegrand::l_squared(u1, z)).abs();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn log_slope_of_power_law() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.7)).collect();
        assert!((log_slope(&x, &y) + 0.7).abs() < 1e-12);
    }

    #[test]
    fn two_exponent_tail_is_exact_for_exact_series() {
        let inc: Vec<f64> = (0..4)
            .map(|k| 2.0 * 2f64.powf(-0.2 * k as f64) + 5.0 * 2f64.powf(-(k as f64)))
            .collect();
        let exact: f64 = (4..4000)
            .map(|k| 2.0 * 2f64.powf(-0.2 * k as f64) + 5.0 * 2f64.powf(-(k as f64)))
            .sum();
        let t = extrapolate_tail(&inc, [-0.2, -1.0]);
        assert!((t - exact).abs() < 1e-9 * exact, "{t} vs {exact}");
    }
}
