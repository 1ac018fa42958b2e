//! Iterated 2D quadrature for integrands of the form `w(x, v) / <A·Q(x, v)>^{2b}`
//! where, for fixed outer variable `x`, `Q` is a quadratic in the inner
//! variable `v`. Breakpoints are laid out geometrically around the roots and
//! the vertex of the quadratic, around weight kinks, and around the outer
//! points where the quadratic degenerates or becomes tangent.

use crate::quadrature::{finalize_breaks, geometric_points, integrate_breaks, Integral, Tolerance};
use crate::scalar::Scalar;

/// `amp · (q2 v² + q1 v + q0)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadratic<T> {
    pub amp: T,
    pub q2: T,
    pub q1: T,
    pub q0: T,
}

impl<T: Scalar> Quadratic<T> {
    pub fn discriminant(&self) -> T {
        self.q1 * self.q1 - T::lit(4.0) * self.q2 * self.q0
    }

    /// Breakpoint features: (centre, width) for each root and the vertex.
    pub fn features(&self, out: &mut Vec<(T, T)>) {
        let amp = self.amp.abs();
        let (q2, q1, q0) = (self.q2, self.q1, self.q0);
        let two = T::lit(2.0);
        if q2 != T::zero() {
            let v = -q1 / (two * q2);
            out.push((v, T::one() / (amp * q2.abs()).sqrt()));
            let disc = self.discriminant();
            if disc > T::zero() {
                let sq = disc.sqrt();
                let w = T::one() / (amp * sq);
                // Cancellation-free pair of roots.
                let t = -(q1 + q1.signum() * sq) / two;
                if t != T::zero() {
                    out.push((t / q2, w));
                    out.push((q0 / t, w));
                } else {
                    out.push((v, w));
                }
            }
        } else if q1 != T::zero() {
            out.push((-q0 / q1, T::one() / (amp * q1.abs())));
        }
    }
}

pub(crate) trait Kernel<T: Scalar>: Sync {
    fn value(&self, outer: T, inner: T) -> T;
    fn inner_quadratic(&self, outer: T) -> Quadratic<T>;
    /// Inner-variable kinks of the weight.
    fn inner_kinks(&self, outer: T, out: &mut Vec<T>);
    /// Outer-variable points where the inner quadratic degenerates or the
    /// weight has a kink.
    fn outer_points(&self, out: &mut Vec<T>);
}

/// Square annulus `h_in ≤ max(|x−c_x|, |v−c_v|) ≤ h_out`, optionally with
/// the outer variable clipped from below.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Annulus<T> {
    pub center: (T, T),
    pub h_in: T,
    pub h_out: T,
    pub outer_floor: Option<T>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IterTol<T> {
    pub inner_rel: T,
    pub outer_rel: T,
    /// Absolute floor for the outer error, so that thin shells are only
    /// resolved relative to what has already been accumulated.
    pub outer_abs: T,
    pub inner_panels: usize,
    pub outer_panels: usize,
}

impl<T: Scalar> IterTol<T> {
    pub fn from_target(rel: f64) -> Self {
        Self {
            inner_rel: T::lit((rel * 1e-2).max(1e-10)),
            outer_rel: T::lit((rel * 1e-1).max(1e-9)),
            outer_abs: T::zero(),
            inner_panels: 600,
            outer_panels: 1500,
        }
    }
}

const RATIO: f64 = 10.0;

fn expand<T: Scalar>(features: &[(T, T)], lo: T, hi: T, out: &mut Vec<T>) {
    let ratio = T::lit(RATIO);
    for &(c, w) in features {
        let floor = T::lit(1e-13) * (T::one() + c.abs());
        geometric_points(c, w.max(floor), ratio, lo, hi, out);
    }
}

fn inner_integral<T: Scalar, K: Kernel<T>>(
    k: &K,
    x: T,
    ranges: &[(T, T)],
    tol: &IterTol<T>,
    features: &mut Vec<(T, T)>,
    pts: &mut Vec<T>,
) -> Integral<T> {
    let quad = k.inner_quadratic(x);
    let mut total = Integral::zero();
    for &(lo, hi) in ranges {
        if !(hi > lo) {
            continue;
        }
        features.clear();
        quad.features(features);
        pts.clear();
        k.inner_kinks(x, pts);
        let kinks: Vec<T> = pts.clone();
        for p in kinks {
            features.push((p, (hi - lo) * T::lit(1e-9)));
        }
        pts.clear();
        expand(features, lo, hi, pts);
        let breaks = finalize_breaks(std::mem::take(pts), lo, hi);
        let t = Tolerance {
            abs: T::zero(),
            rel: tol.inner_rel,
            max_panels: tol.inner_panels.max(breaks.len() + 16),
        };
        total = total.combine(integrate_breaks(|v| k.value(x, v), &breaks, t));
    }
    total
}

/// Bisects sign changes of the inner discriminant over the outer range,
/// locating tangencies of the resonance curve with the inner direction.
fn tangencies<T: Scalar, K: Kernel<T>>(k: &K, samples: &[T], out: &mut Vec<T>) {
    let disc = |x: T| k.inner_quadratic(x).discriminant();
    let mut dense = Vec::with_capacity(samples.len() * 4);
    for w in samples.windows(2) {
        for j in 0..4 {
            dense.push(w[0] + (w[1] - w[0]) * T::lit(j as f64 / 4.0));
        }
    }
    if let Some(last) = samples.last() {
        dense.push(*last);
    }
    for w in dense.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (disc(a), disc(b));
        if !(fa.signum() != fb.signum() && fa != T::zero() && fb != T::zero()) {
            continue;
        }
        for _ in 0..80 {
            let m = (a + b) / T::lit(2.0);
            if !(m > a && m < b) {
                break;
            }
            let fm = disc(m);
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        out.push((a + b) / T::lit(2.0));
    }
}

pub(crate) fn integrate_region<T: Scalar, K: Kernel<T>>(
    k: &K,
    region: &Annulus<T>,
    tol: &IterTol<T>,
) -> Integral<T> {
    let (cx, cv) = region.center;
    let (h_in, h_out) = (region.h_in, region.h_out);
    let mut lo = cx - h_out;
    let hi = cx + h_out;
    if let Some(f) = region.outer_floor {
        lo = lo.max(f);
    }
    if !(hi > lo) {
        return Integral::zero();
    }
    let mut singular = Vec::new();
    k.outer_points(&mut singular);
    let mut coarse = singular.clone();
    coarse.extend([cx - h_in, cx + h_in]);
    expand(
        &coarse.iter().map(|&c| (c, h_out * T::lit(1e-3))).collect::<Vec<_>>(),
        lo,
        hi,
        &mut singular,
    );
    let coarse = finalize_breaks(singular.clone(), lo, hi);
    let mut points = Vec::new();
    tangencies(k, &coarse, &mut points);
    let scale = h_out.max(T::one());
    let w0 = T::lit(1e-10) * scale;
    let mut features: Vec<(T, T)> = points.iter().map(|&p| (p, w0)).collect();
    let mut outer_pts = Vec::new();
    k.outer_points(&mut outer_pts);
    features.extend(outer_pts.iter().map(|&p| (p, w0)));
    let mut pts = vec![cx - h_in, cx + h_in];
    expand(&features, lo, hi, &mut pts);
    pts.extend(coarse.iter().copied());
    let breaks = finalize_breaks(pts, lo, hi);

    let mut feat_buf = Vec::new();
    let mut pt_buf = Vec::new();
    let mut inner_failures = 0usize;
    let mut inner_evals = 0usize;
    let outer = |x: T| {
        let ranges: [(T, T); 2] = if (x - cx).abs() >= h_in {
            [(cv - h_out, cv + h_out), (T::zero(), T::zero())]
        } else {
            [(cv - h_out, cv - h_in), (cv + h_in, cv + h_out)]
        };
        let r = inner_integral(k, x, &ranges, tol, &mut feat_buf, &mut pt_buf);
        inner_evals += r.evaluations;
        if !r.converged {
            inner_failures += 1;
        }
        r.value
    };
    let t = Tolerance {
        abs: tol.outer_abs,
        rel: tol.outer_rel,
        max_panels: tol.outer_panels.max(breaks.len() + 16),
    };
    let mut result = integrate_breaks(outer, &breaks, t);
    result.evaluations += inner_evals;
    result.converged &= inner_failures == 0;
    result
}
