//! Quadrature checks of the four elementary calculus inequalities behind the
//! trilinear estimate.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quadrature::{
    finalize_breaks, geometric_points, integrate_breaks, integrate_power_endpoint,
    integrate_power_tail, Integral, QuadSpec, Tolerance,
};
use crate::scalar::Scalar;

/// A quadrature value and its normalised ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaRatio {
    pub integral: f64,
    pub ratio: f64,
    pub error: f64,
}

/// Sampled supremum of `|x|^{c₁}<ax>^{−c₂}·a^{c₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupReport {
    pub sup: f64,
    pub argmax: f64,
    /// Same supremum on a grid twice as dense.
    pub refined_sup: f64,
}

/// Log-spaced sample grid in `x`, with `x = 0` always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub per_decade: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            x_min: 1e-8,
            x_max: 1e8,
            per_decade: 64,
        }
    }
}

fn tol<T: Scalar>(quad: &QuadSpec) -> Tolerance<T> {
    Tolerance::relative(T::lit((quad.tolerance * 1e-3).max(1e-13))).with_panels(4000)
}

fn finish<T: Scalar>(total: Integral<T>, norm: T, quad: &QuadSpec) -> Result<LemmaRatio> {
    let rel = total.relative_error().to_f64_lossy();
    if !total.converged && rel > quad.tolerance {
        return Err(LabError::QuadratureNonConvergence {
            value: total.value.to_f64_lossy(),
            achieved: rel,
            target: quad.tolerance,
        });
    }
    Ok(LemmaRatio {
        integral: total.value.to_f64_lossy(),
        ratio: (total.value * norm).to_f64_lossy(),
        error: total.error.to_f64_lossy(),
    })
}

/// `∫ dx / (<x−a₁>^{2b} <x−a₂>^{2b})`; the ratio is taken against
/// `<a₁−a₂>^{−2b}`.
pub fn check_el1<T: Scalar>(a1: T, a2: T, b: T, quad: &QuadSpec) -> Result<LemmaRatio> {
    if !(b > T::lit(0.5)) {
        return Err(LabError::Precondition(format!("el1 needs b > 1/2, got {b}")));
    }
    let two_b = b + b;
    let f = |x: T| ((x - a1).bracket() * (x - a2).bracket()).powf(-two_b);
    let lo = a1.min(a2);
    let hi = a1.max(a2);
    let r = T::lit(quad.truncation_radius);
    let t = tol::<T>(quad);
    let core = integrate_breaks(f, &finalize_breaks(vec![a1, a2], lo - r, hi + r), t);
    let p = two_b + two_b;
    let right = integrate_power_tail(|d: T| f(hi + d), r, p, t);
    let left = integrate_power_tail(|d: T| f(lo - d), r, p, t);
    finish(core.combine(right).combine(left), (a1 - a2).bracket().powf(two_b), quad)
}

/// `∫ dx / (|x−a₁|^{c₁} |x−a₂|^{c₂})`; the ratio is taken against
/// `|a₁−a₂|^{1−c₁−c₂}`.
pub fn check_el2<T: Scalar>(a1: T, a2: T, c1: T, c2: T, quad: &QuadSpec) -> Result<LemmaRatio> {
    let zero = T::zero();
    let one = T::one();
    if !(c1 > zero && c1 < one && c2 > zero && c2 < one && c1 + c2 > one) {
        return Err(LabError::Precondition(format!(
            "el2 needs 0 < c1, c2 < 1 < c1 + c2, got c1 = {c1}, c2 = {c2}"
        )));
    }
    if a1 == a2 {
        return Err(LabError::Precondition("el2 needs a1 != a2".into()));
    }
    let sep = (a1 - a2).abs();
    let w = T::lit(0.1) * sep.min(one);
    let t = tol::<T>(quad);
    // Integrand seen from a singular point `a` with exponent `c`, the other
    // point being `o` with exponent `e`.
    let near = |a: T, c: T, o: T, e: T| move |d: T| d.abs().powf(-c) * (a + d - o).abs().powf(-e);
    let mut total = Integral::zero();
    for (a, c, o, e) in [(a1, c1, a2, c2), (a2, c2, a1, c1)] {
        total = total
            .combine(integrate_power_endpoint(near(a, c, o, e), w, c, t))
            .combine(integrate_power_endpoint(near(a, c, o, e), -w, c, t));
    }
    let f = |x: T| (x - a1).abs().powf(-c1) * (x - a2).abs().powf(-c2);
    let lo = a1.min(a2);
    let hi = a1.max(a2);
    total = total.combine(integrate_breaks(f, &[lo + w, hi - w], t));
    let span = T::lit(quad.truncation_radius) * sep.max(one);
    let mut outer = Vec::new();
    geometric_points(lo, w, T::lit(4.0), lo - span, lo - w, &mut outer);
    geometric_points(hi, w, T::lit(4.0), hi + w, hi + span, &mut outer);
    let mut left: Vec<T> = outer.iter().copied().filter(|p| *p < lo).collect();
    let mut right: Vec<T> = outer.iter().copied().filter(|p| *p > hi).collect();
    left.extend([lo - span, lo - w]);
    right.extend([hi + w, hi + span]);
    total = total
        .combine(integrate_breaks(f, &finalize_breaks(left, lo - span, lo - w), t))
        .combine(integrate_breaks(f, &finalize_breaks(right, hi + w, hi + span), t));
    let p = c1 + c2;
    total = total
        .combine(integrate_power_tail(|d: T| f(lo - d), span, p, t))
        .combine(integrate_power_tail(|d: T| f(hi + d), span, p, t));
    finish(total, sep.powf(c1 + c2 - one), quad)
}

/// Sampled `sup_x |x|^{c₁} <ax>^{−c₂} a^{c₁}` for `0 ≤ c₁ ≤ c₂`, `a > 0`.
/// The integrand is even, so only `x ≥ 0` is sampled.
pub fn check_el3<T: Scalar>(a: T, c1: T, c2: T, grid: &SampleGrid) -> Result<SupReport> {
    if !(a > T::zero()) {
        return Err(LabError::Precondition(format!("el3 needs a > 0, got {a}")));
    }
    if !(c1 >= T::zero() && c1 <= c2) {
        return Err(LabError::Precondition(format!(
            "el3 needs 0 <= c1 <= c2, got c1 = {c1}, c2 = {c2}"
        )));
    }
    if !(grid.x_min > 0.0 && grid.x_max > grid.x_min && grid.per_decade > 0) {
        return Err(LabError::param("grid", "need 0 < x_min < x_max and per_decade > 0"));
    }
    let f = |x: T| x.powf(c1) * (a * x).bracket().powf(-c2) * a.powf(c1);
    let sample = |per_decade: usize| {
        let mut best = (f(T::zero()), 0.0);
        for x in crate::quadrature::log_space(grid.x_min, grid.x_max, per_decade) {
            let v = f(T::lit(x));
            if v > best.0 {
                best = (v, x);
            }
        }
        best
    };
    let (sup, argmax) = sample(grid.per_decade);
    let (refined, _) = sample(2 * grid.per_decade);
    Ok(SupReport {
        sup: sup.to_f64_lossy(),
        argmax,
        refined_sup: refined.to_f64_lossy(),
    })
}

/// `∫ dx / <a(x²−η²)>^{2b}`; the ratio is taken against `|aη|^{−1}`.
pub fn check_el4<T: Scalar>(a: T, eta: T, b: T, quad: &QuadSpec) -> Result<LemmaRatio> {
    if !(b > T::lit(0.5)) {
        return Err(LabError::Precondition(format!("el4 needs b > 1/2, got {b}")));
    }
    if a == T::zero() || eta == T::zero() {
        return Err(LabError::Precondition("el4 needs a != 0 and eta != 0".into()));
    }
    let two_b = b + b;
    let e = eta.abs();
    let f = move |x: T| (a * (x * x - e * e)).bracket().powf(-two_b);
    // Even integrand: integrate over x ≥ 0 and double.
    let width = T::one() / (T::lit(2.0) * a.abs() * e);
    let far = e + e + T::lit(quad.truncation_radius) * (T::one() / a.abs().sqrt()).max(e);
    let mut pts = vec![e];
    geometric_points(e, width, T::lit(4.0), T::zero(), far, &mut pts);
    let t = tol::<T>(quad);
    let core = integrate_breaks(f, &finalize_breaks(pts, T::zero(), far), t);
    let tail = integrate_power_tail(f, far, two_b + two_b, t);
    let mut total = core.combine(tail);
    total.value = total.value + total.value;
    total.error = total.error + total.error;
    finish(total, (a * eta).abs(), quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn el1_equal_centres_is_a_single_bracket_integral() {
        // ∫ <x>^{-4b} = 2/(4b−1) at a₁ = a₂ = 0.
        let r = check_el1(0.0, 0.0, 0.75, &QuadSpec::default()).unwrap();
        assert!((r.integral - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn el4_rejects_degenerate_inputs() {
        assert!(check_el4(0.0, 1.0, 0.75, &QuadSpec::default()).is_err());
        assert!(check_el4(1.0, 1.0, 0.5, &QuadSpec::default()).is_err());
    }

    #[test]
    fn el3_constant_exponent_zero() {
        let r = check_el3(3.0, 0.0, 0.5, &SampleGrid::default()).unwrap();
        assert_eq!(r.sup, 1.0);
        assert_eq!(r.argmax, 0.0);
    }
}
