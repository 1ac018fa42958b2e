//! Adaptive Gauss–Kronrod quadrature with the two exact changes of variable
//! the estimate checks need: endpoint power singularities and power-law tails.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Quadrature controls shared by the estimate checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Truncation radius `R` for integrals over unbounded domains.
    pub truncation_radius: f64,
    /// Sampling density for log-spaced scans.
    pub points_per_decade: usize,
    /// Relative error target.
    pub tolerance: f64,
    /// Maximum number of truncation doublings (or grid refinements).
    pub max_refinements: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            truncation_radius: 16.0,
            points_per_decade: 4,
            tolerance: 1e-3,
            max_refinements: 6,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.truncation_radius >= 10.0) {
            errs.push(format!(
                "truncation_radius = {} must be >= 10",
                self.truncation_radius
            ));
        }
        if !(self.tolerance > 0.0) {
            errs.push("tolerance must be > 0".to_string());
        }
        if self.points_per_decade == 0 {
            errs.push("points_per_decade must be >= 1".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Scalar> Integral<T> {
    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
            converged: true,
        }
    }

    pub fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn relative_error(&self) -> T {
        if self.value == T::zero() {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

/// Tolerances for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_panels: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn relative(rel: T) -> Self {
        Self {
            abs: T::zero(),
            rel,
            max_panels: 2000,
        }
    }

    pub fn with_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Rule<T> {
    xgk: [T; 8],
    wgk: [T; 8],
    wg: [T; 4],
}

impl<T: Scalar> Rule<T> {
    fn new() -> Self {
        Self {
            xgk: XGK.map(T::lit),
            wgk: WGK.map(T::lit),
            wg: WG.map(T::lit),
        }
    }

    /// 15-point Kronrod estimate and |K15 − G7| on `[a, b]`.
    fn panel<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> (T, T) {
        let half = (b - a) / T::lit(2.0);
        let center = (a + b) / T::lit(2.0);
        let fc = f(center);
        let mut kron = fc * self.wgk[7];
        let mut gauss = fc * self.wg[3];
        for j in 0..7 {
            let dx = half * self.xgk[j];
            let s = f(center - dx) + f(center + dx);
            kron = kron + self.wgk[j] * s;
            if j % 2 == 1 {
                gauss = gauss + self.wg[j / 2] * s;
            }
        }
        let k = kron * half.abs();
        let g = gauss * half.abs();
        let sign = if b >= a { T::one() } else { -T::one() };
        (sign * k, (k - g).abs())
    }
}

/// Globally adaptive integration over consecutive breakpoints.
///
/// The panel with the largest error estimate is bisected until the summed
/// error meets `max(abs, rel·|value|)` or `max_panels` is reached.
pub fn integrate_breaks<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    tol: Tolerance<T>,
) -> Integral<T> {
    if breaks.len() < 2 {
        return Integral::zero();
    }
    let rule = Rule::new();
    let mut panels: Vec<(T, T, T, T)> = Vec::with_capacity(breaks.len() * 4);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = rule.panel(&mut f, w[0], w[1]);
            panels.push((w[0], w[1], v, e));
        }
    }
    let mut evaluations = 15 * panels.len();
    let max_panels = tol.max_panels.max(panels.len());
    loop {
        let value: T = panels.iter().map(|p| p.2).sum();
        let error: T = panels.iter().map(|p| p.3).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || !error.is_finite() || panels.len() >= max_panels {
            return Integral {
                value,
                error,
                evaluations,
                converged: error <= target,
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -T::one()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = panels.swap_remove(idx);
        let mid = (a + b) / T::lit(2.0);
        if !(mid > a && mid < b) {
            // Interval can no longer be split in this precision.
            let value: T = panels.iter().map(|p| p.2).sum();
            let (v, e) = rule.panel(&mut f, a, b);
            let error: T = panels.iter().map(|p| p.3).sum::<T>() + e;
            return Integral {
                value: value + v,
                error,
                evaluations: evaluations + 15,
                converged: false,
            };
        }
        let (v1, e1) = rule.panel(&mut f, a, mid);
        let (v2, e2) = rule.panel(&mut f, mid, b);
        evaluations += 30;
        panels.push((a, mid, v1, e1));
        panels.push((mid, b, v2, e2));
    }
}

pub fn integrate<T: Scalar, F: FnMut(T) -> T>(f: F, a: T, b: T, tol: Tolerance<T>) -> Integral<T> {
    if b < a {
        let mut r = integrate_breaks(f, &[b, a], tol);
        r.value = -r.value;
        return r;
    }
    integrate_breaks(f, &[a, b], tol)
}

/// `∫_a^{a+w} f(x) dx` for `f(x) ~ |x − a|^{−c}` near `a`, `0 ≤ c < 1`; `w`
/// may be negative. `f` receives the offset `d = x − a` so that points next
/// to the singularity keep full precision. Uses `d = w·t^{1/(1−c)}`, which
/// turns the power singularity into a bounded integrand.
pub fn integrate_power_endpoint<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    w: T,
    c: T,
    tol: Tolerance<T>,
) -> Integral<T> {
    let q = T::one() / (T::one() - c);
    let width = w.abs();
    let dir = if w >= T::zero() { T::one() } else { -T::one() };
    let jac = width * q;
    integrate(
        |t: T| {
            if t <= T::zero() {
                return T::zero();
            }
            let d = dir * width * t.powf(q);
            f(d) * jac * t.powf(q - T::one())
        },
        T::zero(),
        T::one(),
        tol,
    )
}

/// `∫_r^∞ f` for `f(x) ~ x^{−p}`, `p > 1`, `r > 0`. Uses `x = r v^{−1/(p−1)}`,
/// which maps the power-law tail to a bounded integrand on `(0, 1]`.
pub fn integrate_power_tail<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    r: T,
    p: T,
    tol: Tolerance<T>,
) -> Integral<T> {
    let e = T::one() / (p - T::one());
    let jac = r * e;
    integrate(
        |v: T| {
            if v <= T::zero() {
                return T::zero();
            }
            let x = r * v.powf(-e);
            f(x) * jac * v.powf(-e - T::one())
        },
        T::zero(),
        T::one(),
        tol,
    )
}

/// Geometric breakpoints `c ± w·ratio^j` clipped to `[lo, hi]`.
pub fn geometric_points<T: Scalar>(center: T, width: T, ratio: T, lo: T, hi: T, out: &mut Vec<T>) {
    if !(center.is_finite() && width.is_finite()) || width <= T::zero() {
        return;
    }
    if center > lo && center < hi {
        out.push(center);
    }
    let span = hi - lo;
    let mut d = width;
    while d < span {
        let l = center - d;
        let r = center + d;
        if l > lo && l < hi {
            out.push(l);
        }
        if r > lo && r < hi {
            out.push(r);
        }
        if l <= lo && r >= hi {
            break;
        }
        d = d * ratio;
    }
}

/// Sorts, clips to `[lo, hi]`, adds the endpoints and removes duplicates.
pub fn finalize_breaks<T: Scalar>(mut pts: Vec<T>, lo: T, hi: T) -> Vec<T> {
    pts.retain(|p| p.is_finite() && *p > lo && *p < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup_by(|a, b| *a == *b);
    pts
}

/// `n` points per decade between `lo` and `hi` (both positive), inclusive.
pub fn log_space(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    (0..=n)
        .map(|i| lo * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance<f64> {
        Tolerance::relative(1e-12)
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| 3.0 * x * x, 0.0, 2.0, tol());
        assert!((r.value - 8.0).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x: f64| x.exp(), 1.0, 0.0, tol());
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let r = integrate_breaks(|x: f64| (1.0 + x.abs()).powf(-3.0), &[-5.0, 0.0, 5.0], tol());
        let exact = 2.0 * 0.5 * (1.0 - 1.0 / 36.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-0.7} dx = 1/0.3
        let r = integrate_power_endpoint(|d: f64| d.powf(-0.7), 1.0, 0.7, tol());
        assert!((r.value - 1.0 / 0.3).abs() < 1e-10, "{}", r.value);
        let l = integrate_power_endpoint(|d: f64| (-d).powf(-0.7), -1.0, 0.7, tol());
        assert!((l.value - 1.0 / 0.3).abs() < 1e-10);
    }

    #[test]
    fn power_tail() {
        // ∫_2^∞ x^{-1.2} dx = 2^{-0.2}/0.2
        let r = integrate_power_tail(|x: f64| x.powf(-1.2), 2.0, 1.2, tol());
        assert!((r.value - 2f64.powf(-0.2) / 0.2).abs() < 1e-10);
        // ∫_1^∞ (1+x)^{-3} dx = 1/8
        let r = integrate_power_tail(|x: f64| (1.0 + x).powf(-3.0), 1.0, 3.0, tol());
        assert!((r.value - 0.125).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_resolved_by_geometric_points() {
        let w: f64 = 1e-7;
        let mut pts = Vec::new();
        geometric_points(0.3, w, 4.0, -1.0, 1.0, &mut pts);
        let br = finalize_breaks(pts, -1.0, 1.0);
        let exact = w * ((0.7 / w).atan() + (1.3 / w).atan());
        let shifted = |x: f64| 1.0 / (1.0 + ((x - 0.3) / w).powi(2));
        let r2 = integrate_breaks(shifted, &br, Tolerance::relative(1e-10));
        assert!((r2.value - exact).abs() < 1e-9 * exact, "{} vs {}", r2.value, exact);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1.0, 100.0, 2);
        assert_eq!(v.len(), 5);
        assert!((v[4] - 100.0).abs() < 1e-12);
        assert!((v[2] - 10.0).abs() < 1e-12);
    }
}
