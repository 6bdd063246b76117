//! Plateau problems ∂Σ = S^{n-2}_r × {z} for graphs of revolution, solved by
//! shooting on the axis height f0 = f(0).
//!
//! The residual g(f0) = f(r; f0) - z is scanned on a bracket, each sign
//! change is bisected, and among the resulting solutions the one of least
//! area is returned. Trajectories that fall into the horizon or turn
//! vertically downward count as g < 0; upward blowups count as g > 0.

pub mod oracle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Heading, Result};
use crate::geometry::area_functional;
use crate::metric::AmbientMetric;
use crate::profile::{integrate, tail_integral, IntegrateOptions, ProfileOde, RadialProfile, HORIZON_GUARD};
use crate::quadrature::{composite, gl32};
use crate::report::CheckReport;

pub use oracle::{direct_minimization, perturbation_comparison, DirectMinimum};

/// Bracket handling: scan density and geometric growth of the upper end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketPolicy {
    pub scan_samples: usize,
    pub expansions: usize,
    pub growth: f64,
}

impl Default for BracketPolicy {
    fn default() -> Self {
        Self { scan_samples: 16, expansions: 8, growth: 2.0 }
    }
}

#[derive(Clone, Debug)]
pub struct ShootingProblem {
    pub metric: AmbientMetric,
    pub r: f64,
    pub z: f64,
    /// Bound on |f(r) - z|.
    pub tol: f64,
    pub max_iter: usize,
    pub bracket: BracketPolicy,
    pub integrate: IntegrateOptions,
}

impl ShootingProblem {
    pub fn new(metric: AmbientMetric, r: f64, z: f64) -> Self {
        Self {
            metric,
            r,
            z,
            tol: default_tolerance(z),
            max_iter: 200,
            bracket: BracketPolicy::default(),
            integrate: IntegrateOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        if !(self.r > 2.0) || !self.r.is_finite() {
            return Err(Error::InvalidConfig(format!("boundary radius r = {} must exceed 2", self.r)));
        }
        if !(self.tol > 0.0) || !self.z.is_finite() {
            return Err(Error::InvalidConfig("shooting tolerance must be positive".into()));
        }
        if self.bracket.scan_samples < 2 || !(self.bracket.growth > 1.0) {
            return Err(Error::InvalidConfig("bracket policy needs >= 2 samples and growth > 1".into()));
        }
        let x = self.metric.meridian_point(self.r, self.z);
        self.metric.check_domain(&x)
    }
}

pub fn default_tolerance(z: f64) -> f64 {
    1e-9 * z.abs().max(1.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShootingDiagnostics {
    pub iterations: usize,
    pub shots: usize,
    pub bracket: (f64, f64),
    pub expansions: usize,
    /// Axis heights of all converged roots, ascending.
    pub roots: Vec<f64>,
    /// Adjacent scan samples where the residual decreased in f0.
    pub monotonicity_violations: usize,
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct PlateauSolution {
    pub profile: RadialProfile,
    pub diagnostics: ShootingDiagnostics,
}

/// Residual sign class of one shot.
enum Shot {
    Value(f64, Box<RadialProfile>),
    Below,
    Above,
}

impl Shot {
    fn sign(&self) -> f64 {
        match self {
            Shot::Value(g, _) => *g,
            Shot::Below => -1.0,
            Shot::Above => 1.0,
        }
    }
}

fn shoot(p: &ShootingProblem, ode: &ProfileOde, f0: f64) -> Result<Shot> {
    match integrate(ode, f0, p.r, &p.integrate) {
        Ok(mut prof) => {
            prof.z = p.z;
            Ok(Shot::Value(prof.end().f - p.z, Box::new(prof)))
        }
        Err(Error::HorizonCollision { .. }) | Err(Error::DomainViolation(_)) => Ok(Shot::Below),
        Err(Error::SlopeBlowup { heading: Heading::Down, .. }) => Ok(Shot::Below),
        Err(Error::SlopeBlowup { heading: Heading::Up, .. }) => Ok(Shot::Above),
        Err(e) => Err(e),
    }
}

/// Lower end of the f0 bracket: z, lifted clear of the horizon guard band.
fn bracket_floor(p: &ShootingProblem) -> f64 {
    match p.metric.horizon_radius() {
        Some(rh) if p.z > -rh => p.z.max(rh * (1.0 + 10.0 * HORIZON_GUARD)),
        _ => p.z,
    }
}

pub fn solve_plateau(problem: &ShootingProblem) -> Result<RadialProfile> {
    solve_plateau_detailed(problem).map(|s| s.profile)
}

pub fn solve_plateau_detailed(problem: &ShootingProblem) -> Result<PlateauSolution> {
    problem.validate()?;
    let ode = ProfileOde::new(problem.metric.clone());
    let n = problem.metric.dim;
    if problem.metric.is_flat() {
        let Shot::Value(_, prof) = shoot(problem, &ode, problem.z)? else {
            unreachable!("flat shots cannot fail");
        };
        let area = area_functional(&*prof, &problem.metric, 0.0, problem.r)?;
        let diagnostics = ShootingDiagnostics {
            shots: 1,
            bracket: (problem.z, problem.z),
            roots: vec![problem.z],
            area,
            ..Default::default()
        };
        return Ok(PlateauSolution { profile: *prof, diagnostics });
    }
    let lo = bracket_floor(problem);
    let mut hi = problem.z.max(lo) + height_bound_constant(n.max(4)) + 1.0;
    let mut diag = ShootingDiagnostics::default();
    let samples = problem.bracket.scan_samples;
    for expansion in 0..=problem.bracket.expansions {
        diag.expansions = expansion;
        diag.bracket = (lo, hi);
        let grid: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
        let shots: Vec<Shot> = grid.par_iter().map(|&f0| shoot(problem, &ode, f0)).collect::<Result<_>>()?;
        diag.shots += shots.len();
        diag.monotonicity_violations = shots
            .windows(2)
            .filter(|w| matches!((&w[0], &w[1]), (Shot::Value(a, _), Shot::Value(b, _)) if b < a))
            .count();
        let mut candidates: Vec<RadialProfile> = Vec::new();
        for (k, s) in shots.iter().enumerate() {
            if let Shot::Value(g, prof) = s {
                if g.abs() < problem.tol {
                    candidates.push((**prof).clone());
                    continue;
                }
            }
            if k + 1 < shots.len() {
                let (a, b) = (s.sign(), shots[k + 1].sign());
                let next_is_root = matches!(&shots[k + 1], Shot::Value(g, _) if g.abs() < problem.tol);
                if a * b < 0.0 && !next_is_root {
                    if let Some((prof, it)) = bisect(problem, &ode, grid[k], grid[k + 1], a)? {
                        diag.iterations += it;
                        candidates.push(prof);
                    }
                }
            }
        }
        if !candidates.is_empty() {
            return select_least_area(problem, candidates, diag);
        }
        hi = lo + problem.bracket.growth * (hi - lo);
    }
    Err(Error::NoBracket { lo, hi: diag.bracket.1 })
}

/// Bisection on [a, b] with residual sign `sign_a` at a. None when the
/// interval collapses onto a jump instead of a root.
fn bisect(p: &ShootingProblem, ode: &ProfileOde, mut a: f64, mut b: f64, sign_a: f64) -> Result<Option<(RadialProfile, usize)>> {
    for it in 1..=p.max_iter {
        let mid = 0.5 * (a + b);
        let shot = shoot(p, ode, mid)?;
        if let Shot::Value(g, prof) = &shot {
            if g.abs() < p.tol {
                return Ok(Some(((**prof).clone(), it)));
            }
        }
        if shot.sign() * sign_a > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            return Ok(None);
        }
    }
    Err(Error::MaxIterations(p.max_iter))
}

fn select_least_area(p: &ShootingProblem, candidates: Vec<RadialProfile>, mut diag: ShootingDiagnostics) -> Result<PlateauSolution> {
    let mut best: Option<(f64, RadialProfile)> = None;
    let mut roots = Vec::new();
    for c in candidates {
        roots.push(c.f0);
        let a = area_functional(&c, &p.metric, 0.0, p.r)?;
        if best.as_ref().map_or(true, |(b, _)| a < *b) {
            best = Some((a, c));
        }
    }
    roots.sort_by(f64::total_cmp);
    let (area, profile) = best.unwrap();
    diag.roots = roots;
    diag.area = area;
    Ok(PlateauSolution { profile, diagnostics: diag })
}

/// C_height(n) = 4(n-1)·∫_{4(n-1)}^∞ t^{2-n}(ln t + 1) dt, by antiderivative.
pub fn height_bound_constant(n: usize) -> f64 {
    assert!(n >= 4, "height bound needs n >= 4");
    let a = 4.0 * (n as f64 - 1.0);
    let k1 = n as f64 - 3.0;
    a * a.powf(-k1) * ((a.ln() + 1.0) / k1 + 1.0 / (k1 * k1))
}

/// Same constant by quadrature after t = a·e^s.
pub fn height_bound_constant_quadrature(n: usize) -> f64 {
    let a = 4.0 * (n as f64 - 1.0);
    let k1 = n as f64 - 3.0;
    let s_max = 60.0 / k1;
    let breaks: Vec<f64> = (0..=60).map(|i| s_max * i as f64 / 60.0).collect();
    a * a.powf(-k1) * composite(gl32(), &breaks, |s| (-k1 * s).exp() * (a.ln() + s + 1.0))
}

/// Lower slope barrier -4(n-1)t^{2-n}(ln t + 1) on t ≥ 4(n-1).
pub fn slope_lower_bound(n: usize, t: f64) -> f64 {
    -4.0 * (n as f64 - 1.0) * t.powi(2 - n as i32) * (t.ln() + 1.0)
}

/// Dense grid of radii used by the checks: all samples plus uniform fill.
fn check_grid(profile: &RadialProfile, count: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = profile.samples.iter().map(|s| s.t).collect();
    let (a, b) = (profile.t_min(), profile.r);
    ts.extend((0..=count).map(|k| a + (b - a) * k as f64 / count as f64));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// f'' by a five-point stencil on the dense slope, h = t/100.
pub fn dense_second_derivative(profile: &RadialProfile, t: f64) -> f64 {
    let h = 0.01 * t;
    let p = |s: f64| profile.eval(s).p;
    (p(t - 2.0 * h) - 8.0 * p(t - h) + 8.0 * p(t + h) - p(t + 2.0 * h)) / (12.0 * h)
}

/// Mean curvature of the graph at t with f'' taken from the dense slope.
pub fn graph_mean_curvature(profile: &RadialProfile, t: f64) -> Result<f64> {
    let n = profile.dim();
    let s = profile.eval(t);
    let w = (1.0 + s.p * s.p).sqrt();
    let f2 = dense_second_derivative(profile, t);
    let h_bar = -(f2 / (w * w * w) + (n as f64 - 2.0) * s.p / (t * w));
    let x = profile.metric.meridian_point(t, s.f);
    let mut nu = vec![0.0; n];
    nu[0] = -s.p / w;
    nu[n - 1] = 1.0 / w;
    crate::metric::mean_curvature_from_euclidean(&profile.metric, &x, h_bar, &nu)
}

/// Properties of a Plateau solution: monotone profile, confinement above the
/// boundary plane, the Schwarzschild slope and height bounds, and H = 0.
pub fn verify_solution(profile: &RadialProfile) -> Vec<CheckReport> {
    let n = profile.dim();
    let z = profile.z;
    let tol = default_tolerance(z);
    let mut out = Vec::new();

    let max_p = profile.samples.iter().map(|s| s.p).fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckReport::new("plateau.monotone_profile", "graph slope p <= 0 at every sample", max_p, 1e-10));

    let grid = check_grid(profile, 2000);
    let mut below = 0.0f64;
    for &t in grid.iter().filter(|&&t| t < profile.r) {
        below = below.max(z - profile.height(t));
    }
    out.push(
        CheckReport::new("plateau.above_boundary_plane", "f(t) > z for t < r (cylinder confinement)", below.max(0.0), tol)
            .metric("max_z_minus_f", below),
    );

    if profile.metric.is_unit_horizon_schwarzschild() && n >= 4 {
        let t0 = 4.0 * (n as f64 - 1.0);
        let c = height_bound_constant(n);
        let mut slope_gap = f64::INFINITY;
        let mut height_excess = f64::NEG_INFINITY;
        for &t in grid.iter().filter(|&&t| t >= t0 && t <= profile.r) {
            let s = profile.eval(t);
            slope_gap = slope_gap.min(s.p - slope_lower_bound(n, t));
            height_excess = height_excess.max((s.f - z - c).max(z - s.f - tol));
        }
        if slope_gap.is_finite() {
            out.push(
                CheckReport::new(
                    "plateau.slope_bound",
                    "f'(t) >= -4(n-1) t^{2-n} (log t + 1) for t >= 4(n-1)",
                    (-slope_gap).max(0.0),
                    0.0,
                )
                .metric("min_margin", slope_gap),
            );
            out.push(
                CheckReport::new("plateau.height_bound", "z <= f(t) <= z + C_height(n) for t >= 4(n-1)", height_excess.max(0.0), 0.0)
                    .metric("c_height", c),
            );
        }
    }

    let interior: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| t > 100.0 * profile.t_start && t * 1.03 < profile.r)
        .collect();
    let stride = (interior.len() / 400).max(1);
    let mut h_max = 0.0f64;
    for &t in interior.iter().step_by(stride) {
        match graph_mean_curvature(profile, t) {
            Ok(h) => h_max = h_max.max(h.abs()),
            Err(_) => h_max = f64::NAN,
        }
    }
    out.push(CheckReport::new("plateau.minimal", "mean curvature H = 0 at interior samples", h_max, 1e-6));
    out
}

/// f_{r,z}(z^{-2})/z over a decreasing z grid; the ratio must stay ≥ 1 and
/// decrease toward 1.
pub fn small_z_scan(metric: &AmbientMetric, z_grid: &[f64], r: f64) -> Result<CheckReport> {
    for w in z_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidConfig("z grid must decrease".into()));
        }
    }
    for &z in z_grid {
        if !(z > 0.0) || !(r > z.powi(-2)) {
            return Err(Error::InvalidConfig(format!("need z > 0 and r > z^-2 (z = {z}, r = {r})")));
        }
    }
    let ratios: Vec<f64> = z_grid
        .par_iter()
        .map(|&z| {
            let prof = solve_plateau(&ShootingProblem::new(metric.clone(), r, z))?;
            Ok(prof.height(z.powi(-2)) / z)
        })
        .collect::<Result<_>>()?;
    let noise = 1e-8;
    let mut violation = 0.0f64;
    for (i, q) in ratios.iter().enumerate() {
        violation = violation.max(1.0 - noise - q);
        if i > 0 {
            violation = violation.max(q - ratios[i - 1] - noise);
        }
    }
    let mut rep = CheckReport::new(
        "plateau.small_z_ratio",
        "f_{r,z}(z^-2) = z + o(z): ratio >= 1 and decreasing to 1 as z -> 0",
        violation.max(0.0),
        0.0,
    );
    for (z, q) in z_grid.iter().zip(&ratios) {
        rep = rep.metric(format!("ratio_z={z}"), *q);
    }
    Ok(rep)
}

/// Empirical constants for the slab flatness threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabThreshold {
    pub t0_hat: f64,
    /// max over the sweep of sup_{t ≥ t̂0}(f - z), before clamping.
    pub c0_raw: f64,
    pub c0_hat: f64,
    pub tail_integral: f64,
    /// -ĉ0 - t̂0^{1/(n-2)}·I_n.
    pub threshold: f64,
}

/// Estimates t̂0 = 4(n-1) and ĉ0 from solved slab profiles over the given
/// (z, r) sweep; ĉ0 is clamped to at least 1.
pub fn estimate_slab_threshold(metric: &AmbientMetric, zs: &[f64], rs: &[f64]) -> Result<SlabThreshold> {
    let n = metric.dim;
    if n < 4 {
        return Err(Error::InvalidConfig("slab threshold needs n >= 4".into()));
    }
    let t0 = 4.0 * (n as f64 - 1.0);
    let jobs: Vec<(f64, f64)> = zs.iter().flat_map(|&z| rs.iter().map(move |&r| (z, r))).collect();
    if jobs.is_empty() || rs.iter().any(|&r| r <= t0) {
        return Err(Error::InvalidConfig(format!("slab sweep needs radii above {t0}")));
    }
    let heights: Vec<f64> = jobs
        .par_iter()
        .map(|&(z, r)| {
            let prof = solve_plateau(&ShootingProblem::new(metric.clone(), r, z))?;
            let grid = check_grid(&prof, 400);
            Ok(grid.iter().filter(|&&t| t >= t0).map(|&t| prof.height(t) - z).fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let c0_raw = heights.iter().copied().fold(0.0, f64::max);
    let c0_hat = c0_raw.max(1.0);
    let i_n = tail_integral(n);
    Ok(SlabThreshold {
        t0_hat: t0,
        c0_raw,
        c0_hat,
        tail_integral: i_n,
        threshold: -c0_hat - t0.powf(1.0 / (n as f64 - 2.0)) * i_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_constant_closed_form_and_quadrature() {
        assert!((height_bound_constant(4) - (12f64.ln() + 2.0)).abs() < 1e-14);
        for n in 4..=7 {
            let (a, b) = (height_bound_constant(n), height_bound_constant_quadrature(n));
            assert!((a - b).abs() < 1e-10, "{n}: {a} {b}");
        }
        assert!(height_bound_constant(7) < height_bound_constant(4));
    }

    #[test]
    fn flat_plateau_is_plane() {
        let p = ShootingProblem::new(AmbientMetric::flat(4), 10.0, 1.0);
        let s = solve_plateau_detailed(&p).unwrap();
        assert_eq!(s.diagnostics.iterations, 0);
        assert!(s.profile.samples.iter().all(|st| st.f == 1.0));
        assert!(verify_solution(&s.profile).iter().all(|r| r.passed));
    }

    #[test]
    fn schwarzschild_solution_verifies() {
        let p = ShootingProblem::new(AmbientMetric::schwarzschild(4, 2.0), 100.0, 1.0);
        let s = solve_plateau_detailed(&p).unwrap();
        assert!(s.profile.residual().abs() < p.tol);
        let reps = verify_solution(&s.profile);
        for r in &reps {
            assert!(r.passed, "{r:?}");
        }
        assert_eq!(reps.len(), 5);
    }

    #[test]
    fn corrupted_profile_fails_monotonicity() {
        let p = ShootingProblem::new(AmbientMetric::schwarzschild(4, 2.0), 50.0, 1.0);
        let prof = solve_plateau(&p).unwrap();
        let mut samples = prof.samples.clone();
        let k = samples.len() / 2;
        samples[k].p = -samples[k].p;
        let bad = prof.with_samples(samples);
        let reps = verify_solution(&bad);
        assert!(!reps.iter().find(|r| r.id == "plateau.monotone_profile").unwrap().passed);
    }

    #[test]
    fn solutions_nest() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let a = solve_plateau(&ShootingProblem::new(m.clone(), 60.0, 1.0)).unwrap();
        let b = solve_plateau(&ShootingProblem::new(m, 60.0, 1.5)).unwrap();
        for k in 0..=600 {
            let t = 0.1 * k as f64;
            assert!(a.height(t) < b.height(t), "{t}");
        }
    }

    #[test]
    fn invalid_problem_rejected() {
        let p = ShootingProblem::new(AmbientMetric::schwarzschild(4, 2.0), 1.5, 1.0);
        assert!(matches!(solve_plateau(&p), Err(Error::InvalidConfig(_))));
        let mut q = ShootingProblem::new(AmbientMetric::flat(4), 10.0, 1.0);
        q.tol = -1.0;
        assert!(q.validate().is_err());
    }
}
