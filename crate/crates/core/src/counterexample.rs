//! Frequency-localised counterexample to the trilinear estimate below
//! `s = −1/4`: the indicator of a thin slab `B` along the dispersion curve,
//! its triple convolution `χ_B ∗ χ_B ∗ χ_{−B}`, and the scaling of both
//! `X^{s,b}` norms in the slab position `N`.
//!
//! Everything is computed in continuum quadrature in the sheared coordinates
//! `(ξ, σ = τ − φ(ξ))`, in which `B = [N, N+δ] × [−1, 1]` with `δ = N^{−1/2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::PhaseParams;

/// One quadrature node of the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSample<T> {
    pub xi: T,
    /// Modulation `τ − φ(ξ)`.
    pub sigma: T,
    pub weight: T,
}

/// Midpoint discretisation of `B = {N ≤ ξ ≤ N + N^{−1/2}, |τ − φ(ξ)| ≤ 1}`.
#[derive(Debug, Clone)]
pub struct BumpSet<T> {
    pub n: T,
    pub delta: T,
    pub params: PhaseParams<T>,
    pub samples: Vec<BumpSample<T>>,
    pub measure: T,
}

impl<T: Scalar> BumpSet<T> {
    pub fn tau(&self, s: &BumpSample<T>) -> T {
        self.params.phase(s.xi) + s.sigma
    }

    /// Checks the two defining inequalities at every sample.
    pub fn contains_all(&self) -> bool {
        self.samples.iter().all(|s| {
            s.xi >= self.n && s.xi <= self.n + self.delta && s.sigma.abs() <= T::one()
        })
    }
}

pub fn build_bump<T: Scalar>(
    n: T,
    n_xi: usize,
    n_sigma: usize,
    params: &PhaseParams<T>,
) -> Result<BumpSet<T>> {
    if !(n >= T::lit(4.0)) {
        return Err(LabError::param("N", format!("{n} must be >= 4")));
    }
    if n_xi < 64 || n_sigma < 64 {
        return Err(LabError::param("resolution", "need at least 64 x 64 samples"));
    }
    let delta = n.powf(T::lit(-0.5));
    let dxi = delta / T::from_usize_lossy(n_xi);
    let dsig = T::lit(2.0) / T::from_usize_lossy(n_sigma);
    let weight = dxi * dsig;
    let half = T::lit(0.5);
    let mut samples = Vec::with_capacity(n_xi * n_sigma);
    for i in 0..n_xi {
        let xi = n + (T::from_usize_lossy(i) + half) * dxi;
        for j in 0..n_sigma {
            let sigma = -T::one() + (T::from_usize_lossy(j) + half) * dsig;
            samples.push(BumpSample { xi, sigma, weight });
        }
    }
    let measure = samples.iter().map(|s| s.weight).sum();
    Ok(BumpSet {
        n,
        delta,
        params: *params,
        samples,
        measure,
    })
}

/// `(∫_B <ξ>^{2s} <τ−φ(ξ)>^{2b})^{1/2}`.
pub fn bump_xsb_norm<T: Scalar>(bump: &BumpSet<T>, s: T, b: T) -> T {
    let two = T::lit(2.0);
    bump.samples
        .iter()
        .map(|p| p.weight * p.xi.bracket().powf(two * s) * p.sigma.bracket().powf(two * b))
        .sum::<T>()
        .sqrt()
}

/// `(χ∗χ∗χ)(m)` for `χ = 1_{[−1,1]}`: the length of
/// `{(s₁,s₂) ∈ [−1,1]² : s₁ + s₂ − m ∈ [−1,1]}` integrated over the slab
/// modulations.
pub fn box_triple<T: Scalar>(m: T) -> T {
    let m = m.abs();
    let three = T::lit(3.0);
    if m <= T::one() {
        three - m * m
    } else if m <= three {
        let d = three - m;
        d * d / T::lit(2.0)
    } else {
        T::zero()
    }
}

/// `φ(N+a) − φ(N+e)` without forming `φ` at size `N³`.
fn phase_gap<T: Scalar>(p: &PhaseParams<T>, n: T, a: T, e: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let quad = p.alpha * (two * n + a + e);
    let cubic = p.beta * (three * n * n + three * n * (a + e) + a * a + a * e + e * e);
    (a - e) * (quad + cubic)
}

/// How the `(a, b)` integral over the frequency projection of `B × B` is
/// sampled; the modulation variables are integrated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConvolutionMode {
    /// Jittered stratified Monte Carlo with `strata²` samples per target.
    MonteCarlo { strata: usize, seed: u64 },
    /// Deterministic midpoint tensor grid with `points²` nodes.
    Grid { points: usize },
}

impl ConvolutionMode {
    fn per_axis(&self) -> usize {
        match *self {
            ConvolutionMode::MonteCarlo { strata, .. } => strata,
            ConvolutionMode::Grid { points } => points,
        }
    }
}

/// Target lattice in `(ξ, σ)`.
#[derive(Debug, Clone)]
pub struct TargetLattice<T> {
    pub xi: Vec<T>,
    pub sigma: Vec<T>,
}

impl<T: Scalar> TargetLattice<T> {
    /// Midpoint lattice over `ξ ∈ [N−2δ, N+3δ]` and `|σ| ≤ 3.5 + max|φ''|δ²`,
    /// which contains the whole support of the convolution.
    pub fn covering(bump: &BumpSet<T>, n_xi: usize, n_sigma: usize) -> Self {
        let (n, d) = (bump.n, bump.delta);
        let lo = n - d - d;
        let hi = n + T::lit(3.0) * d;
        let curv = bump
            .params
            .phase_curvature(lo)
            .abs()
            .max(bump.params.phase_curvature(hi).abs());
        let s = T::lit(3.5) + curv * d * d;
        Self::uniform(lo, hi, n_xi, -s, s, n_sigma)
    }

    pub fn uniform(xi_lo: T, xi_hi: T, n_xi: usize, s_lo: T, s_hi: T, n_sigma: usize) -> Self {
        let half = T::lit(0.5);
        let step = |lo: T, hi: T, n: usize| (hi - lo) / T::from_usize_lossy(n);
        let dx = step(xi_lo, xi_hi, n_xi);
        let ds = step(s_lo, s_hi, n_sigma);
        Self {
            xi: (0..n_xi)
                .map(|i| xi_lo + (T::from_usize_lossy(i) + half) * dx)
                .collect(),
            sigma: (0..n_sigma)
                .map(|j| s_lo + (T::from_usize_lossy(j) + half) * ds)
                .collect(),
        }
    }

    fn cell_area(&self) -> T {
        let spacing = |v: &[T]| {
            if v.len() > 1 {
                (v[v.len() - 1] - v[0]) / T::from_usize_lossy(v.len() - 1)
            } else {
                T::zero()
            }
        };
        spacing(&self.xi) * spacing(&self.sigma)
    }
}

/// Values of `χ_B ∗ χ_B ∗ χ_{−B}` on a target lattice, `ξ`-major.
#[derive(Debug, Clone)]
pub struct ConvolutionTable<T> {
    pub n: T,
    pub delta: T,
    pub xi: Vec<T>,
    pub sigma: Vec<T>,
    pub values: Vec<T>,
    /// Monte Carlo standard error per target (zero in grid mode).
    pub std_error: Vec<T>,
    pub cell_area: T,
}

/// Sub-rectangle where the convolution exceeds half its maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRegion {
    pub peak: f64,
    pub area: f64,
    /// Largest relative Monte Carlo error inside the region.
    pub max_rel_error: f64,
}

impl<T: Scalar> ConvolutionTable<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.sigma.len() + j]
    }

    /// Riemann sum of the table; equals `|B|³` by Fubini.
    pub fn total(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.cell_area
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero())
    }

    /// `X^{s,b′}` norm of the convolution by weighted quadrature over targets.
    pub fn xsb_norm(&self, s: T, b_prime: T) -> T {
        let two = T::lit(2.0);
        let ns = self.sigma.len();
        let mut acc = T::zero();
        for (i, xi) in self.xi.iter().enumerate() {
            let wx = xi.bracket().powf(two * s);
            for (j, sg) in self.sigma.iter().enumerate() {
                let v = self.values[i * ns + j];
                if v != T::zero() {
                    acc = acc + wx * sg.bracket().powf(two * b_prime) * v * v;
                }
            }
        }
        (acc * self.cell_area).sqrt()
    }

    pub fn peak_region(&self) -> PeakRegion {
        let peak = self.values.iter().copied().fold(T::zero(), T::max);
        let half = peak / T::lit(2.0);
        let mut count = 0usize;
        let mut worst = T::zero();
        for (v, e) in self.values.iter().zip(&self.std_error) {
            if *v >= half && *v > T::zero() {
                count += 1;
                worst = worst.max(*e / *v);
            }
        }
        PeakRegion {
            peak: peak.to_f64_lossy(),
            area: (T::from_usize_lossy(count) * self.cell_area).to_f64_lossy(),
            max_rel_error: worst.to_f64_lossy(),
        }
    }

    /// True when the Monte Carlo error inside the peak region exceeds 5%.
    pub fn undersampled(&self) -> bool {
        self.peak_region().max_rel_error > 0.05
    }
}

/// `(χ_B ∗ χ_B ∗ χ_{−B})(ζ) = |{(x, y) ∈ B × B : x + y − ζ ∈ B}|` on a lattice.
///
/// With `x = (N+a, ·)`, `y = (N+b, ·)` and `ζ = (N+e, φ(N+e) + σ)` the
/// membership of `x + y − ζ` fixes `c = a + b − e ∈ [0, δ]`, and the three
/// modulations integrate to `box_triple(σ − D)` with
/// `D = φ(N+a) + φ(N+b) − φ(N+c) − φ(N+e)`.
pub fn triple_convolution<T: Scalar>(
    bump: &BumpSet<T>,
    targets: &TargetLattice<T>,
    mode: ConvolutionMode,
) -> Result<ConvolutionTable<T>> {
    let m = mode.per_axis();
    if m < 8 {
        return Err(LabError::param("convolution sampling", "need at least 8 points per axis"));
    }
    let (n, delta) = (bump.n, bump.delta);
    let params = bump.params;
    let h = delta / T::from_usize_lossy(m);
    let w = h * h;
    let ns = targets.sigma.len();
    let rows: Vec<(Vec<T>, Vec<T>)> = targets
        .xi
        .par_iter()
        .enumerate()
        .map(|(i, &xz)| {
            let e = xz - n;
            let mut rng = match mode {
                ConvolutionMode::MonteCarlo { seed, .. } => {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    r.set_stream(i as u64);
                    Some(r)
                }
                ConvolutionMode::Grid { .. } => None,
            };
            let mut gaps = Vec::with_capacity(m * m);
            for p in 0..m {
                for q in 0..m {
                    let (ja, jb) = match rng.as_mut() {
                        Some(r) => (T::lit(r.gen::<f64>()), T::lit(r.gen::<f64>())),
                        None => (T::lit(0.5), T::lit(0.5)),
                    };
                    let a = (T::from_usize_lossy(p) + ja) * h;
                    let b = (T::from_usize_lossy(q) + jb) * h;
                    let c = a + b - e;
                    if c >= T::zero() && c <= delta {
                        gaps.push(phase_gap(&params, n, a, e) + phase_gap(&params, n, b, c));
                    }
                }
            }
            let total = T::from_usize_lossy(m * m);
            let mut vals = Vec::with_capacity(ns);
            let mut errs = Vec::with_capacity(ns);
            for &sg in &targets.sigma {
                let mut sum = T::zero();
                let mut sq = T::zero();
                for &d in &gaps {
                    let f = box_triple(sg - d);
                    sum = sum + f;
                    sq = sq + f * f;
                }
                vals.push(sum * w);
                let err = if rng.is_some() && m * m > 1 {
                    let mean = sum / total;
                    let var = (sq / total - mean * mean).max(T::zero()) * total
                        / (total - T::one());
                    (var / total).sqrt() * total * w
                } else {
                    T::zero()
                };
                errs.push(err);
            }
            (vals, errs)
        })
        .collect();
    let mut values = Vec::with_capacity(targets.xi.len() * ns);
    let mut std_error = Vec::with_capacity(values.capacity());
    for (v, e) in rows {
        values.extend(v);
        std_error.extend(e);
    }
    Ok(ConvolutionTable {
        n,
        delta,
        xi: targets.xi.clone(),
        sigma: targets.sigma.clone(),
        values,
        std_error,
        cell_area: targets.cell_area(),
    })
}

/// Sampling resolution of one counterexample evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub bump_xi: usize,
    pub bump_sigma: usize,
    pub target_xi: usize,
    pub target_sigma: usize,
    pub mode: ConvolutionMode,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            bump_xi: 64,
            bump_sigma: 256,
            target_xi: 80,
            target_sigma: 160,
            mode: ConvolutionMode::MonteCarlo {
                strata: 128,
                seed: 0x5eed,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleRatio {
    pub n: f64,
    pub num: f64,
    pub den: f64,
    pub ratio: f64,
    /// `total / |B|³ − 1`.
    pub mass_defect: f64,
    pub undersampled: bool,
}

/// A bump and its convolution table, reusable across `(s, b)`.
#[derive(Debug, Clone)]
pub struct Counterexample<T> {
    pub bump: BumpSet<T>,
    pub table: ConvolutionTable<T>,
}

impl<T: Scalar> Counterexample<T> {
    pub fn build(n: T, res: &Resolution, params: &PhaseParams<T>) -> Result<Self> {
        let bump = build_bump(n, res.bump_xi, res.bump_sigma, params)?;
        let targets = TargetLattice::covering(&bump, res.target_xi, res.target_sigma);
        let table = triple_convolution(&bump, &targets, res.mode)?;
        Ok(Self { bump, table })
    }

    /// `‖χ_B∗χ_B∗χ_{−B}‖_{X^{s,b−1}} / ‖χ_B‖³_{X^{s,b}}`.
    pub fn ratio(&self, s: T, b: T) -> CounterexampleRatio {
        let num = self.table.xsb_norm(s, b - T::one());
        let den = bump_xsb_norm(&self.bump, s, b).powi(3);
        let mass = self.bump.measure.powi(3);
        CounterexampleRatio {
            n: self.bump.n.to_f64_lossy(),
            num: num.to_f64_lossy(),
            den: den.to_f64_lossy(),
            ratio: (num / den).to_f64_lossy(),
            mass_defect: (self.table.total() / mass - T::one()).to_f64_lossy(),
            undersampled: self.table.undersampled(),
        }
    }
}

pub fn counterexample_ratio<T: Scalar>(
    n: T,
    s: T,
    b: T,
    res: &Resolution,
    params: &PhaseParams<T>,
) -> Result<CounterexampleRatio> {
    Ok(Counterexample::build(n, res, params)?.ratio(s, b))
}

/// Least-squares fit of `ln value` against `ln N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingReport> {
    if points.len() < 3 {
        return Err(LabError::param("points", format!("need >= 3, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points[0].0 <= 0.0 {
        return Err(LabError::param("points", "N must be positive and strictly increasing"));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(LabError::param("points", format!("nonpositive value {} at N = {}", p.1, p.0)));
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(ScalingReport {
        points: points.to_vec(),
        slope,
        intercept,
        stderr,
    })
}

impl ScalingReport {
    /// `N,value` rows with a header naming the value column.
    pub fn to_csv(&self, value_name: &str) -> String {
        let mut out = format!("N,{value_name}\n");
        for (n, v) in &self.points {
            out.push_str(&format!("{n},{v:e}\n"));
        }
        out
    }
}

/// `N,num,den,ratio` rows.
pub fn ratios_to_csv(rows: &[CounterexampleRatio]) -> String {
    let mut out = String::from("N,num,den,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{:e},{:e},{:e}\n", r.n, r.num, r.den, r.ratio));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn cubic() -> PhaseParams<f64> {
        PhaseParams::cubic(Complex::new(1.0, 0.0))
    }

    #[test]
    fn box_triple_is_a_unit_mass_density_times_eight() {
        // ∫ (χ∗χ∗χ) = (∫χ)³ = 8.
        let n = 60_000;
        let h = 8.0 / n as f64;
        let total: f64 = (0..n).map(|i| box_triple(-4.0 + (i as f64 + 0.5) * h) * h).sum();
        assert!((total - 8.0).abs() < 1e-6);
        assert_eq!(box_triple(1.0), 2.0);
        assert_eq!(box_triple(3.0), 0.0);
    }

    #[test]
    fn phase_gap_matches_direct_difference() {
        let p = PhaseParams::<f64>::new(0.4, 1.0, Complex::new(1.0, 0.0)).unwrap();
        let (n, a, e) = (10.0, 0.2, -0.15);
        let direct = p.phase(n + a) - p.phase(n + e);
        assert!((phase_gap(&p, n, a, e) - direct).abs() < 1e-10);
    }

    #[test]
    fn far_target_is_zero() {
        let bump = build_bump(64.0, 64, 64, &cubic()).unwrap();
        let t = TargetLattice::uniform(80.0, 81.0, 2, -1.0, 1.0, 2);
        let table = triple_convolution(&bump, &t, ConvolutionMode::Grid { points: 16 }).unwrap();
        assert!(table.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fit_rejects_nonpositive_values() {
        let pts = [(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)];
        assert!(fit_scaling_exponent(&pts).is_err());
    }
}
