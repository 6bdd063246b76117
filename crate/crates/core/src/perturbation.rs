//! Superharmonic bump fields, bump chains and the conformal perturbations
//! g_t = (1 + tδv)^{4/(n-2)}·g built from them.
//!
//! A bump is v(x) = ψ(s) with s the straight-ray conformal distance from the
//! center q. Writing d = 6r - s, ψ(s) = -F(d)/F_max where
//!   F = 0                         for d ≤ 0,
//!   F'' = λ² e^{λd} d / w         on the join band 0 < d ≤ w (w = r/20),
//!   F'' = λ² e^{λd}               up to s = r,
//!   F' = F'(5r)·κ((d - 5r)/L)     on the cap r/2 ≤ s ≤ r, L = r/2,
//!   F constant                    for s < r/2,
//! with κ the cubic Hermite blend matching F' and F'' at s = r and vanishing
//! with its derivative at s = r/2. The result is C², equals 0 for s ≥ 6r, lies
//! in [-1, 0), and on r < s < 6r has flat Laplacian e^{λd}λ(-λ + (n-1)/s)/F_max
//! outside the join band.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{norm2, Jet1, Jet2, Scalar};
use crate::metric::{fd, scalar_curvature, AmbientMetric};
use crate::quadrature::gl16;
use crate::report::CheckReport;

/// Radial and angular grid resolution for bump sign checks.
pub const GRID_RADIAL: usize = 64;
pub const GRID_ANGULAR: usize = 32;
/// Safety factor on the sup/inf estimates feeding the chain coefficients.
pub const CHAIN_MARGIN: f64 = 1.1;
/// Slack (in units of r) allowed in the sampled overlap condition.
pub const OVERLAP_SLACK: f64 = 0.02;
const DIRECTION_SEED: u64 = 0x6275_6d70;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpField {
    pub center: Vec<f64>,
    pub radius: f64,
    pub steepness: f64,
    pub join_width: f64,
}

impl BumpField {
    /// Unchecked constructor with the default join width r/20.
    pub fn new(center: Vec<f64>, radius: f64, steepness: f64) -> Self {
        Self { center, radius, steepness, join_width: 0.05 * radius }
    }

    /// F and its first two derivatives at d = 6r - s, unnormalized.
    fn raw(&self, d: f64) -> (f64, f64, f64) {
        let (r, lam, w) = (self.radius, self.steepness, self.join_width);
        if d <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if d <= w {
            return join_profile(lam, w, d);
        }
        let (fw, dfw, _) = join_profile(lam, w, w);
        let exp_part = |d: f64| {
            let (ed, ew) = ((lam * d).exp(), (lam * w).exp());
            let f = fw + dfw * (d - w) + (ed - ew) - lam * ew * (d - w);
            (f, dfw + lam * (ed - ew), lam * lam * ed)
        };
        let dc = 5.0 * r;
        if d <= dc {
            return exp_part(d);
        }
        let (fc, dfc, ddfc) = exp_part(dc);
        let l = 0.5 * r;
        let beta = ddfc * l / dfc;
        let x = ((d - dc) / l).min(1.0);
        let kappa = (2.0 * x * x * x - 3.0 * x * x + 1.0) + beta * (x * x * x - 2.0 * x * x + x);
        let dkappa = (6.0 * x * x - 6.0 * x) + beta * (3.0 * x * x - 4.0 * x + 1.0);
        let ikappa = (0.5 * x.powi(4) - x.powi(3) + x) + beta * (0.25 * x.powi(4) - 2.0 / 3.0 * x.powi(3) + 0.5 * x * x);
        if d >= dc + l {
            return (fc + l * dfc * ikappa, 0.0, 0.0);
        }
        (fc + l * dfc * ikappa, dfc * kappa, dfc * dkappa / l)
    }

    /// ψ(s), ψ'(s), ψ''(s).
    pub fn profile(&self, s: f64) -> (f64, f64, f64) {
        let fmax = self.raw(6.0 * self.radius).0;
        let (f, df, ddf) = self.raw(6.0 * self.radius - s);
        (-f / fmax, df / fmax, -ddf / fmax)
    }

    /// Straight-ray conformal length from the center to x.
    pub fn distance_value(&self, base: &AmbientMetric, x: &[f64]) -> f64 {
        self.distance(base, x)
    }

    pub fn distance<S: Scalar>(&self, base: &AmbientMetric, x: &[S]) -> S {
        let n = x.len();
        let diff: Vec<S> = x.iter().zip(&self.center).map(|(a, q)| *a - *q).collect();
        let len = norm2(&diff).sqrt();
        if base.is_flat() {
            return len;
        }
        let mut integral = S::constant(0.0, n);
        let mut y = diff.clone();
        for (tau, w) in gl16().mapped(0.0, 1.0) {
            for (k, yk) in y.iter_mut().enumerate() {
                *yk = diff[k] * tau + self.center[k];
            }
            integral = integral + base.omega(&y).sqrt() * w;
        }
        len * integral
    }

    pub fn value<S: Scalar>(&self, base: &AmbientMetric, x: &[S]) -> S {
        let n = x.len();
        let xv: Vec<f64> = x.iter().map(|v| v.value()).collect();
        let s = self.distance_value(base, &xv);
        if !(s < 6.0 * self.radius) {
            return S::constant(0.0, n);
        }
        let (p0, p1, p2) = self.profile(s);
        if s < 0.5 * self.radius {
            return S::constant(p0, n);
        }
        self.distance(base, x).chain(p0, p1, p2)
    }

    /// Δ_g v = ω^{-1}(Δ̄v + (n-2)/2·∇̄ln ω·∇̄v).
    pub fn laplacian(&self, base: &AmbientMetric, x: &[f64]) -> f64 {
        let v: Jet2 = self.value(base, &Jet2::point(x));
        laplacian_from_jet(base, x, &v)
    }
}

fn join_profile(lam: f64, w: f64, d: f64) -> (f64, f64, f64) {
    let x = lam * d;
    let e = x.exp();
    let ddf = lam * lam * e * d / w;
    if x > 2.0 {
        let f = (e * (d - 2.0 / lam) + 2.0 / lam + d) / w;
        let df = (e * (x - 1.0) + 1.0) / w;
        return (f, df, ddf);
    }
    // series avoid cancellation: F = Σ_{k≥3}(k-2)x^k/k! /(wλ), F' = Σ_{k≥2}(k-1)x^k/k! /w
    let (mut f, mut df) = (0.0, 0.0);
    let mut term = x; // x^k/k! at k = 1
    for k in 2..60 {
        term *= x / k as f64;
        let kf = k as f64;
        df += (kf - 1.0) * term;
        if k >= 3 {
            f += (kf - 2.0) * term;
        }
        if term.abs() < 1e-18 * df.abs() {
            break;
        }
    }
    (f / (w * lam), df / w, ddf)
}

fn laplacian_from_jet(base: &AmbientMetric, x: &[f64], v: &Jet2) -> f64 {
    let n = x.len();
    if base.is_flat() {
        return v.laplacian();
    }
    let w: Jet1 = base.omega_jet1(x);
    let drift: f64 = (0..n).map(|k| w.g[k] / w.v * v.g[k]).sum();
    (v.laplacian() + 0.5 * (n as f64 - 2.0) * drift) / w.v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpChain {
    pub bumps: Vec<BumpField>,
    pub coefficients: Vec<f64>,
}

impl BumpChain {
    pub fn centers(&self) -> Vec<Vec<f64>> {
        self.bumps.iter().map(|b| b.center.clone()).collect()
    }

    /// v = Σ a_i v_i.
    pub fn field<S: Scalar>(&self, base: &AmbientMetric, x: &[S]) -> S {
        let mut acc = S::constant(0.0, x.len());
        for (b, a) in self.bumps.iter().zip(&self.coefficients) {
            acc = acc + b.value(base, x) * *a;
        }
        acc
    }

    pub fn value(&self, base: &AmbientMetric, x: &[f64]) -> f64 {
        self.field(base, x)
    }

    pub fn laplacian(&self, base: &AmbientMetric, x: &[f64]) -> f64 {
        let v: Jet2 = self.field(base, &Jet2::point(x));
        laplacian_from_jet(base, x, &v)
    }

    /// Whether x lies in W, the union of the open 6r-balls.
    pub fn in_support(&self, base: &AmbientMetric, x: &[f64]) -> bool {
        self.bumps.iter().any(|b| b.distance_value(base, x) < 6.0 * b.radius)
    }

    /// Largest |v|, which bounds the admissible δ through 1 + tδv > 0.
    pub fn sup_abs(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// Deterministic spread of unit directions including ±e_i.
pub fn ray_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count);
    for i in 0..dim.min(count / 2) {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = sign;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    while dirs.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            dirs.push(v.iter().map(|a| a / r).collect());
        }
    }
    dirs
}

/// Point on the ray q + ρe whose straight-ray distance from q equals `target`.
pub fn point_at_distance(base: &AmbientMetric, bump: &BumpField, dir: &[f64], target: f64) -> Option<Vec<f64>> {
    let at = |rho: f64| -> Vec<f64> { bump.center.iter().zip(dir).map(|(q, e)| q + rho * e).collect() };
    let dist = |rho: f64| bump.distance_value(base, &at(rho));
    let mut hi = target;
    let mut guard = 0;
    while dist(hi) < target {
        hi *= 2.0;
        guard += 1;
        if guard > 60 || base.check_domain(&at(hi)).is_err() {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = at(0.5 * (lo + hi));
    base.check_domain(&x).ok().map(|_| x)
}

/// Samples at the given distances along every direction.
pub fn shell_points(base: &AmbientMetric, bump: &BumpField, distances: &[f64], angular: usize) -> Vec<Vec<f64>> {
    let dirs = ray_directions(base.dim, angular);
    let mut out = Vec::with_capacity(dirs.len() * distances.len());
    for e in &dirs {
        for &s in distances {
            if let Some(x) = point_at_distance(base, bump, e, s) {
                out.push(x);
            }
        }
    }
    out
}

fn uniform_distances(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / count as f64).collect()
}

/// Sign statistics of one bump on its sample grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpGridStats {
    pub samples: usize,
    /// Largest Δ_g v on r < dist < 6r - w (must be negative).
    pub max_laplacian_annulus: f64,
    /// Largest v on dist < 6r (must be negative).
    pub max_value_inside: f64,
    /// Largest |v| on dist ≥ 6r (must be zero).
    pub max_abs_value_outside: f64,
}

pub fn bump_grid_stats(base: &AmbientMetric, bump: &BumpField, radial: usize, angular: usize) -> BumpGridStats {
    let r = bump.radius;
    let pts = shell_points(base, bump, &uniform_distances(0.0, 6.5 * r, radial), angular);
    let mut stats = BumpGridStats {
        samples: pts.len(),
        max_laplacian_annulus: f64::NEG_INFINITY,
        max_value_inside: f64::NEG_INFINITY,
        max_abs_value_outside: 0.0,
    };
    for x in &pts {
        let s = bump.distance_value(base, x);
        let v = bump.value(base, x.as_slice());
        if s < 6.0 * r {
            stats.max_value_inside = stats.max_value_inside.max(v);
            if s > r && s < 6.0 * r - bump.join_width {
                stats.max_laplacian_annulus = stats.max_laplacian_annulus.max(bump.laplacian(base, x));
            }
        } else {
            stats.max_abs_value_outside = stats.max_abs_value_outside.max(v.abs());
        }
    }
    stats
}

/// Bump centered at q with radius r and steepness λ, sign-checked on a grid.
pub fn make_bump(metric: &AmbientMetric, q: &[f64], r: f64, lambda: f64) -> Result<BumpField> {
    let n = metric.dim;
    if q.len() != n || !(r > 0.0) {
        return Err(Error::InvalidConfig("bump center dimension or radius invalid".into()));
    }
    if !(lambda > 2.0 * (n as f64 - 1.0) / r) {
        return Err(Error::InvalidConfig(format!("bump steepness {lambda} must exceed 2(n-1)/r")));
    }
    if let Some(inner) = metric.horizon_radius() {
        let qn = q.iter().map(|a| a * a).sum::<f64>().sqrt();
        if qn - 6.0 * r <= inner {
            return Err(Error::DomainViolation(format!(
                "6r-ball around |q| = {qn} reaches the horizon |x| = {inner}"
            )));
        }
    }
    let bump = BumpField::new(q.to_vec(), r, lambda);
    let stats = bump_grid_stats(metric, &bump, GRID_RADIAL, GRID_ANGULAR);
    if !(stats.max_laplacian_annulus < 0.0) {
        return Err(Error::SteepnessTooLow { max_laplacian: stats.max_laplacian_annulus });
    }
    if !(stats.max_value_inside < 0.0) || stats.max_abs_value_outside != 0.0 {
        return Err(Error::SignCheckFailed(format!(
            "bump values: max inside {}, max |v| outside {}",
            stats.max_value_inside, stats.max_abs_value_outside
        )));
    }
    Ok(bump)
}

/// Sign reports for one bump.
pub fn bump_reports(metric: &AmbientMetric, bump: &BumpField, label: &str) -> Vec<CheckReport> {
    let st = bump_grid_stats(metric, bump, GRID_RADIAL, GRID_ANGULAR);
    let positive = |v: f64| if v.is_finite() { v.max(0.0) } else { f64::INFINITY };
    vec![
        CheckReport::new(format!("{label}.v_zero_outside"), "v = 0 where dist >= 6r", st.max_abs_value_outside, 0.0)
            .metric("samples", st.samples as f64),
        strict_negative(format!("{label}.v_negative_inside"), "v < 0 where dist < 6r", st.max_value_inside)
            .metric("samples", st.samples as f64),
        strict_negative(
            format!("{label}.laplacian_negative"),
            "Laplacian of v < 0 where r < dist < 6r",
            st.max_laplacian_annulus,
        )
        .metric("max_positive_part", positive(st.max_laplacian_annulus)),
    ]
}

/// Report for a strict sign condition `max < 0`: value 0 on success, 1 otherwise.
fn strict_negative(id: String, anchor: &str, max: f64) -> CheckReport {
    let violated = !(max < 0.0);
    CheckReport::new(id, anchor, if violated { 1.0 } else { 0.0 }, 0.0).metric("max", max)
}

fn overlap_check(base: &AmbientMetric, inner: &BumpField, outer: &BumpField) -> Result<()> {
    let r = inner.radius;
    let pts = shell_points(base, inner, &uniform_distances(0.0, r, 16), GRID_ANGULAR);
    let mut pts = pts;
    pts.push(inner.center.clone());
    for x in &pts {
        let d = outer.distance_value(base, x);
        if d < (3.0 - OVERLAP_SLACK) * r || d > (5.0 + OVERLAP_SLACK) * r {
            return Err(Error::OverlapViolation(format!(
                "point of the r-ball around {:?} at distance {:.4}r from the next center",
                inner.center,
                d / r
            )));
        }
    }
    Ok(())
}

/// Chain coefficients a_1 = 1, a_i = 1 + 1.1·sup Δv_{i-1}|_{B_r(q_{i-1})} / min |Δv_i| on
/// the 3r–5r annulus of q_i · a_{i-1}, followed by a grid check of the chain.
pub fn chain_coefficients(metric: &AmbientMetric, bumps: Vec<BumpField>) -> Result<BumpChain> {
    if bumps.is_empty() {
        return Err(Error::InvalidConfig("bump chain needs at least one bump".into()));
    }
    for pair in bumps.windows(2) {
        overlap_check(metric, &pair[0], &pair[1])?;
    }
    let mut coefficients = vec![1.0];
    for i in 1..bumps.len() {
        let (prev, cur) = (&bumps[i - 1], &bumps[i]);
        let r = prev.radius;
        let ball = shell_points(metric, prev, &uniform_distances(0.0, r, GRID_RADIAL), GRID_ANGULAR);
        let sup = ball.iter().map(|x| prev.laplacian(metric, x)).fold(f64::NEG_INFINITY, f64::max);
        let mut dists = uniform_distances(3.0 * r, 5.0 * r, GRID_RADIAL - 2);
        dists.extend([3.0 * r, 5.0 * r]);
        let ann = shell_points(metric, cur, &dists, GRID_ANGULAR);
        let weakest = ann.iter().map(|x| cur.laplacian(metric, x).abs()).fold(f64::INFINITY, f64::min);
        if !(weakest > 0.0) {
            return Err(Error::SignCheckFailed("bump Laplacian vanishes on the 3r-5r annulus".into()));
        }
        let a = 1.0 + CHAIN_MARGIN * sup.max(0.0) / weakest * coefficients[i - 1];
        coefficients.push(a);
    }
    let chain = BumpChain { bumps, coefficients };
    let st = chain_grid_stats(metric, &chain, GRID_RADIAL, GRID_ANGULAR);
    if !(st.max_laplacian < 0.0) {
        return Err(Error::SignCheckFailed(format!(
            "chain Laplacian reaches {} away from the last center",
            st.max_laplacian
        )));
    }
    Ok(chain)
}

/// Centers along a ray with consecutive straight-ray distance 4r.
pub fn chain_centers(metric: &AmbientMetric, start: &[f64], dir: &[f64], count: usize, r: f64) -> Vec<Vec<f64>> {
    let mut centers = vec![start.to_vec()];
    while centers.len() < count {
        let probe = BumpField::new(centers.last().unwrap().clone(), r, 1.0);
        let next = point_at_distance(metric, &probe, dir, 4.0 * r)
            .unwrap_or_else(|| probe.center.iter().zip(dir).map(|(q, e)| q + 4.0 * r * e).collect());
        centers.push(next);
    }
    centers
}

/// Default two-bump chain: r = 1/2, λ = 4(n-1)/r, q_1 = 10·e_1, q_2 at distance 4r
/// further out along e_1.
pub fn default_chain(metric: &AmbientMetric) -> Result<BumpChain> {
    let n = metric.dim;
    let r = 0.5;
    let lambda = 4.0 * (n as f64 - 1.0) / r;
    let mut start = vec![0.0; n];
    start[0] = 10.0;
    let mut dir = vec![0.0; n];
    dir[0] = 1.0;
    let bumps = chain_centers(metric, &start, &dir, 2, r)
        .iter()
        .map(|q| make_bump(metric, q, r, lambda))
        .collect::<Result<Vec<_>>>()?;
    chain_coefficients(metric, bumps)
}

/// Default δ: half the admissible bound, so 1 + tδv ≥ 1/2 for t < 1.
pub fn default_delta(chain: &BumpChain) -> f64 {
    0.5 / chain.sup_abs()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainGridStats {
    pub samples: usize,
    /// Largest Δ_g v on W minus the closed r-ball around the last center.
    pub max_laplacian: f64,
    pub max_value_inside: f64,
    pub max_abs_value_outside: f64,
}

/// Sample points of every bump's grid out to 6.5r.
pub fn chain_grid(metric: &AmbientMetric, chain: &BumpChain, radial: usize, angular: usize) -> Vec<Vec<f64>> {
    chain
        .bumps
        .iter()
        .flat_map(|b| shell_points(metric, b, &uniform_distances(0.0, 6.5 * b.radius, radial), angular))
        .collect()
}

pub fn chain_grid_stats(metric: &AmbientMetric, chain: &BumpChain, radial: usize, angular: usize) -> ChainGridStats {
    let pts = chain_grid(metric, chain, radial, angular);
    let last = chain.bumps.last().unwrap();
    let mut st = ChainGridStats {
        samples: pts.len(),
        max_laplacian: f64::NEG_INFINITY,
        max_value_inside: f64::NEG_INFINITY,
        max_abs_value_outside: 0.0,
    };
    for x in &pts {
        let v = chain.value(metric, x);
        if in_chain_interior(metric, chain, x) {
            st.max_value_inside = st.max_value_inside.max(v);
            if last.distance_value(metric, x) > last.radius {
                st.max_laplacian = st.max_laplacian.max(chain.laplacian(metric, x));
            }
        } else if !chain.in_support(metric, x) {
            st.max_abs_value_outside = st.max_abs_value_outside.max(v.abs());
        }
    }
    st
}

/// x in W away from the outer join bands, where the strict Laplacian sign is asserted.
fn in_chain_interior(metric: &AmbientMetric, chain: &BumpChain, x: &[f64]) -> bool {
    chain.bumps.iter().any(|b| b.distance_value(metric, x) < 6.0 * b.radius - b.join_width)
}

/// Conformal factor ratio minus one, (1+tδv)^{4/(n-2)} - 1, without cancellation.
pub fn factor_ratio_minus_one(dim: usize, t: f64, delta: f64, v: f64) -> f64 {
    (4.0 / (dim as f64 - 2.0) * (t * delta * v).ln_1p()).exp_m1()
}

/// R(g_t) = u^{-(n+2)/(n-2)}·(-4(n-1)/(n-2)·Δ_g u + R(g)·u) with u = 1 + tδv.
pub fn perturbed_scalar_curvature(
    base: &AmbientMetric,
    chain: &BumpChain,
    t: f64,
    delta: f64,
    x: &[f64],
) -> Result<f64> {
    let n = base.dim as f64;
    let r0 = if base.is_flat() || base.is_unit_horizon_schwarzschild() { 0.0 } else { scalar_curvature(base, x)? };
    let u = 1.0 + t * delta * chain.value(base, x);
    let lap = t * delta * chain.laplacian(base, x);
    Ok(u.powf(-(n + 2.0) / (n - 2.0)) * (-4.0 * (n - 1.0) / (n - 2.0) * lap + r0 * u))
}

/// Sign checks of the perturbed metric on a grid around every bump.
pub fn verify_perturbed_metric(
    metric: &AmbientMetric,
    chain: &BumpChain,
    t: f64,
    delta: f64,
) -> Result<Vec<CheckReport>> {
    let n = metric.dim;
    if !(t > 0.0 && t < 1.0) || !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("need t in (0,1) and delta > 0, got {t}, {delta}")));
    }
    let pts = chain_grid(metric, chain, GRID_RADIAL, 80);
    let vmin = pts.iter().map(|x| chain.value(metric, x)).fold(0.0, f64::min);
    let worst = 1.0 + t * delta * vmin.min(-chain.sup_abs());
    if worst <= 0.0 {
        return Err(Error::PositivityViolation { value: worst });
    }
    let perturbed = AmbientMetric::perturbed(metric.clone(), chain.clone(), t, delta);
    let last = chain.bumps.last().unwrap();

    let (mut outside_dev, mut outside_n) = (0.0f64, 0usize);
    let (mut inside_bad, mut inside_n, mut inside_margin) = (0usize, 0usize, f64::NEG_INFINITY);
    let (mut r_bad, mut r_n, mut r_min) = (0usize, 0usize, f64::INFINITY);
    for x in &pts {
        let v = chain.value(metric, x);
        if chain.in_support(metric, x) {
            inside_n += 1;
            let d = factor_ratio_minus_one(n, t, delta, v);
            inside_margin = inside_margin.max(d);
            if !(d < 0.0) {
                inside_bad += 1;
            }
            if in_chain_interior(metric, chain, x) && last.distance_value(metric, x) > last.radius {
                r_n += 1;
                let r = perturbed_scalar_curvature(metric, chain, t, delta, x)?;
                r_min = r_min.min(r);
                if !(r > 0.0) {
                    r_bad += 1;
                }
            }
        } else {
            outside_n += 1;
            let ratio = perturbed.omega_value(x) / metric.omega_value(x);
            outside_dev = outside_dev.max((ratio - 1.0).abs());
        }
    }

    // first-order behavior in t
    let sup_dev = |tt: f64| pts.iter().map(|x| factor_ratio_minus_one(n, tt, delta, chain.value(metric, x)).abs()).fold(0.0, f64::max);
    let (t1, t2) = (1e-3, 5e-4);
    let slope_ratio = sup_dev(t1) / sup_dev(t2);

    let mut reports = vec![
        CheckReport::new("perturbation.equal_outside", "g_t = g outside W", outside_dev, 0.0)
            .metric("samples", outside_n as f64),
        CheckReport::new("perturbation.smaller_inside", "g_t < g in W", inside_bad as f64, 0.0)
            .metric("samples", inside_n as f64)
            .metric("max_factor_minus_one", inside_margin),
        CheckReport::new(
            "perturbation.scalar_positive",
            "R(g_t) > 0 in W away from the last center",
            r_bad as f64,
            0.0,
        )
        .metric("samples", r_n as f64)
        .metric("min_scalar", r_min),
        CheckReport::new("perturbation.linear_in_t", "g_t -> g linearly as t -> 0", (slope_ratio / 2.0 - 1.0).abs(), 0.05)
            .metric("sup_ratio", slope_ratio),
    ];
    reports.push(scalar_oracle_report(metric, chain, t, delta)?);
    Ok(reports)
}

/// Conformal-law R(g_t) against the finite-difference Christoffel oracle at 100
/// samples with r < dist(x, q_N) < 3r/2, where R(g_t) stands above the
/// finite-difference noise floor.
fn scalar_oracle_report(metric: &AmbientMetric, chain: &BumpChain, t: f64, delta: f64) -> Result<CheckReport> {
    let last = chain.bumps.last().unwrap();
    let r = last.radius;
    let perturbed = AmbientMetric::perturbed(metric.clone(), chain.clone(), t, delta);
    let pts = shell_points(metric, last, &uniform_distances(1.05 * r, 1.5 * r, 5), 20);
    let mut worst = 0.0f64;
    for x in pts.iter().take(100) {
        let law = perturbed_scalar_curvature(metric, chain, t, delta, x)?;
        let oracle = fd::conformal_fd_curvature(&perturbed, x, 1e-5)?.scalar;
        worst = worst.max((law - oracle).abs() / law.abs().max(1e-12));
    }
    Ok(CheckReport::new("perturbation.scalar_oracle", "conformal law for R(g_t) matches finite differences", worst, 1e-4)
        .metric("samples", pts.len().min(100) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_bump(n: usize) -> BumpField {
        BumpField::new(vec![0.0; n], 1.0, 4.0 * (n as f64 - 1.0))
    }

    #[test]
    fn profile_is_c2_and_normalized() {
        let b = flat_bump(4);
        assert_eq!(b.profile(0.0).0, -1.0);
        assert_eq!(b.profile(6.0), (0.0, 0.0, 0.0));
        let peak = b.profile(1.0).2.abs();
        let breaks = [0.5, 1.0, 6.0 - b.join_width, 6.0];
        for s in breaks {
            let (a, da, dda) = b.profile(s - 1e-9);
            let (c, dc, ddc) = b.profile(s + 1e-9);
            assert!((a - c).abs() < 1e-7 && (da - dc).abs() < 1e-6 * peak, "s = {s}");
            assert!((dda - ddc).abs() < 1e-6 * peak, "s = {s}: {dda} vs {ddc}");
        }
        // ψ is non-decreasing and negative inside
        let mut prev = -1.0;
        for k in 1..600 {
            let (v, dv, _) = b.profile(0.01 * k as f64);
            assert!(v >= prev && dv >= 0.0 && v < 0.0);
            prev = v;
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = flat_bump(4);
        for s in [0.7, 1.5, 3.0, 5.97] {
            let h = 1e-6;
            let fd1 = (b.profile(s + h).0 - b.profile(s - h).0) / (2.0 * h);
            let fd2 = (b.profile(s + h).1 - b.profile(s - h).1) / (2.0 * h);
            let (_, d1, d2) = b.profile(s);
            assert!((fd1 - d1).abs() <= 1e-5 * d1.abs() + 1e-20, "s = {s}");
            assert!((fd2 - d2).abs() <= 1e-5 * d2.abs() + 1e-20, "s = {s}");
        }
    }

    #[test]
    fn flat_laplacian_closed_form() {
        // Δψ = e^{λd}λ(-λ + (n-1)/s)/F_max on the exponential part
        let n = 4;
        let b = flat_bump(n);
        let fmax = b.raw(6.0).0;
        for s in [1.5, 2.5, 4.0] {
            let x = [s, 0.0, 0.0, 0.0];
            let lam = b.steepness;
            let d = 6.0 - s;
            let expect = (lam * d).exp() * lam * (-lam + (n as f64 - 1.0) / s) / fmax;
            let got = b.laplacian(&AmbientMetric::flat(n), &x);
            assert!((got - expect).abs() < 1e-9 * expect.abs(), "{got} vs {expect}");
        }
    }

    #[test]
    fn zero_outside_support() {
        let m = AmbientMetric::flat(4);
        let b = flat_bump(4);
        assert_eq!(b.value(&m, &[6.0, 0.0, 0.0, 0.0][..]), 0.0);
        assert_eq!(b.value(&m, &[3.0, 5.0, 2.0, 0.0][..]), 0.0);
    }

    #[test]
    fn single_bump_chain() {
        let m = AmbientMetric::flat(4);
        let b = make_bump(&m, &[0.0; 4], 1.0, 12.0).unwrap();
        let c = chain_coefficients(&m, vec![b]).unwrap();
        assert_eq!(c.coefficients, vec![1.0]);
    }

    #[test]
    fn far_centers_violate_overlap() {
        let m = AmbientMetric::flat(4);
        let a = BumpField::new(vec![0.0; 4], 1.0, 12.0);
        let b = BumpField::new(vec![10.0, 0.0, 0.0, 0.0], 1.0, 12.0);
        assert!(matches!(chain_coefficients(&m, vec![a, b]), Err(Error::OverlapViolation(_))));
    }

    #[test]
    fn shallow_bump_rejected() {
        let m = AmbientMetric::flat(4);
        assert!(make_bump(&m, &[0.0; 4], 1.0, 5.0).is_err());
    }

    #[test]
    fn bump_needs_clearance_from_horizon() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let r = make_bump(&m, &[3.0, 0.0, 0.0, 0.0], 0.5, 24.0);
        assert!(matches!(r, Err(Error::DomainViolation(_))));
    }
}

#[cfg(test)]
mod chain_tests {
    use super::*;

    fn check_default(metric: AmbientMetric) {
        let chain = default_chain(&metric).unwrap();
        assert_eq!(chain.coefficients[0], 1.0);
        assert!(chain.coefficients[1] > 1.0);
        for b in &chain.bumps {
            for r in bump_reports(&metric, b, "bump") {
                assert!(r.passed, "{r:?}");
            }
        }
        let delta = default_delta(&chain);
        for r in verify_perturbed_metric(&metric, &chain, 0.5, delta).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn flat_default_chain() {
        check_default(AmbientMetric::flat(4));
    }

    #[test]
    fn schwarzschild_default_chain() {
        check_default(AmbientMetric::schwarzschild(4, 2.0));
    }
}
