//! Quadrature and curvature on hypersurfaces of revolution about the e_n axis.
//!
//! A surface is given by its meridian γ(σ) = (t(σ), x(σ)) in the half-plane
//! {(t, x_n) : t ≥ 0}. The Euclidean unit normal is N = (-x', t')/|γ'|, the
//! principal curvatures with respect to N are
//!   κ₁ = -(t'x'' - x't'')/|γ'|³   (meridian direction),
//!   κ_rot = N_t/t                  (n-2 rotational directions),
//! so that H̄ = κ₁ + (n-2)κ_rot = div N, and dμ̄ = |S^{n-2}|·t^{n-2}·|γ'|·dσ.
//! In g = ω·ḡ each curvature becomes κ_i = ω^{-1/2}(κ̄_i + ½∂_N ln ω) and
//! dμ = ω^{(n-1)/2}dμ̄.

pub mod asymptotics;
pub mod identities;
pub mod monotonicity;
pub mod shape;
pub mod variation;

use crate::error::Result;
use crate::metric::AmbientMetric;
use crate::profile::{CatenoidProfile, RadialProfile};
use crate::quadrature::{gl16, graded_breaks, unit_sphere_area, GaussLegendre};

pub use asymptotics::{ball_isoperimetric_witness, geometric_expansion_check, induced_mass};
pub use identities::{euclidean_ibp_check, gauss_trace_check};
pub use monotonicity::{area_ratio_scan, layer_cake_check, monotonicity_check};
pub use shape::{second_fundamental_form, second_fundamental_form_fd, ShapeData};
pub use variation::{acv_functional, second_variation, second_variation_fd, VariationTestFunction};

/// Position and first two derivatives of a meridian at one parameter value.
#[derive(Clone, Copy, Debug)]
pub struct CurveJet {
    pub t: f64,
    pub x: f64,
    pub dt: f64,
    pub dx: f64,
    pub ddt: f64,
    pub ddx: f64,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.dt.hypot(self.dx)
    }

    /// Euclidean unit normal (N_t, N_x).
    pub fn normal(&self) -> (f64, f64) {
        let l = self.speed();
        (-self.dx / l, self.dt / l)
    }

    pub fn tangent(&self) -> (f64, f64) {
        let l = self.speed();
        (self.dt / l, self.dx / l)
    }

    pub fn kappa_meridian(&self) -> f64 {
        let l = self.speed();
        -(self.dt * self.ddx - self.dx * self.ddt) / (l * l * l)
    }

    /// N_t/t; on the axis the limit equals the meridian curvature.
    pub fn kappa_rotation(&self) -> f64 {
        if self.t == 0.0 {
            return self.kappa_meridian();
        }
        self.normal().0 / self.t
    }

    pub fn mean_curvature_bar(&self, n: usize) -> f64 {
        self.kappa_meridian() + (n as f64 - 2.0) * self.kappa_rotation()
    }
}

/// A meridian curve generating a hypersurface of revolution in R^n.
pub trait Meridian: Sync {
    fn dim(&self) -> usize;
    fn range(&self) -> (f64, f64);
    fn jet(&self, sigma: f64) -> CurveJet;
    /// Panel breaks for composite quadrature over [a, b].
    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        default_breaks(a, b)
    }
    /// Meridian parameter is the radial coordinate t.
    fn is_graph(&self) -> bool {
        false
    }
}

/// Uniform panels of width ≤ 1/2 up to 8, then geometric growth 1.25.
pub fn default_breaks(a: f64, b: f64) -> Vec<f64> {
    if b - a <= 8.0 {
        let k = ((b - a) / 0.5).ceil().max(4.0) as usize;
        return (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect();
    }
    graded_breaks(a, b, 8.0, 16, 1.25)
}

/// Radial graphs x_n = f(t).
pub trait GraphProfile: Sync {
    fn dim(&self) -> usize;
    fn t_range(&self) -> (f64, f64);
    /// (f, f', f'').
    fn graph(&self, t: f64) -> (f64, f64, f64);
    /// Interval needing extra quadrature panels.
    fn feature(&self) -> Option<(f64, f64)> {
        None
    }
}

impl<G: GraphProfile> Meridian for G {
    fn dim(&self) -> usize {
        GraphProfile::dim(self)
    }
    fn range(&self) -> (f64, f64) {
        self.t_range()
    }
    fn jet(&self, t: f64) -> CurveJet {
        let (f, p, f2) = self.graph(t);
        CurveJet { t, x: f, dt: 1.0, dx: p, ddt: 0.0, ddx: f2 }
    }
    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut br = default_breaks(a, b);
        if let Some((lo, hi)) = self.feature() {
            let (lo, hi) = (lo.max(a), hi.min(b));
            if hi > lo {
                br.extend((0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0));
                br.sort_by(f64::total_cmp);
                br.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }
        br
    }
    fn is_graph(&self) -> bool {
        true
    }
}

impl GraphProfile for RadialProfile {
    fn dim(&self) -> usize {
        self.metric.dim
    }
    fn t_range(&self) -> (f64, f64) {
        (self.t_min(), self.r)
    }
    fn graph(&self, t: f64) -> (f64, f64, f64) {
        let s = self.eval(t);
        (s.f, s.p, self.second_derivative(t))
    }
}

/// Flat catenoid-type graph restricted to [t_lo, t_hi].
#[derive(Clone, Copy, Debug)]
pub struct CatenoidGraph {
    pub profile: CatenoidProfile,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl GraphProfile for CatenoidGraph {
    fn dim(&self) -> usize {
        self.profile.n
    }
    fn t_range(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }
    fn graph(&self, t: f64) -> (f64, f64, f64) {
        (self.profile.height(t), self.profile.slope(t), self.profile.second_derivative(t))
    }
}

/// Horizontal hyperplane x_n = z over the disk t ≤ radius.
#[derive(Clone, Copy, Debug)]
pub struct Plane {
    pub dim: usize,
    pub z: f64,
    pub radius: f64,
}

impl GraphProfile for Plane {
    fn dim(&self) -> usize {
        self.dim
    }
    fn t_range(&self) -> (f64, f64) {
        (0.0, self.radius)
    }
    fn graph(&self, _t: f64) -> (f64, f64, f64) {
        (self.z, 0.0, 0.0)
    }
}

/// Arc θ ∈ [θ0, θ1] of the sphere |x - c·e_n| = ρ, θ measured from +e_n.
#[derive(Clone, Copy, Debug)]
pub struct SphereArc {
    pub dim: usize,
    pub center: f64,
    pub radius: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl SphereArc {
    pub fn full(dim: usize, center: f64, radius: f64) -> Self {
        Self { dim, center, radius, theta0: 0.0, theta1: std::f64::consts::PI }
    }
}

impl Meridian for SphereArc {
    fn dim(&self) -> usize {
        self.dim
    }
    fn range(&self) -> (f64, f64) {
        (self.theta0, self.theta1)
    }
    fn jet(&self, th: f64) -> CurveJet {
        let (s, c) = th.sin_cos();
        let r = self.radius;
        CurveJet { t: r * s, x: self.center + r * c, dt: r * c, dx: -r * s, ddt: -r * s, ddx: -r * c }
    }
    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        (0..=16).map(|i| a + (b - a) * i as f64 / 16.0).collect()
    }
}

/// Both sheets of the flat catenoid with neck radius s* = a^{1/(n-2)} and
/// neck height `center`, through t = s* + u², u ∈ [-u_max, u_max]. With
/// (t/s*)^{2n-4} - 1 = u²·h(u²) for the polynomial h, x' = -2h(u²)^{-1/2}.
#[derive(Clone, Copy, Debug)]
pub struct FullCatenoid {
    pub dim: usize,
    pub neck: f64,
    pub center: f64,
    pub u_max: f64,
}

impl FullCatenoid {
    /// h(v) and h'(v) from (1 + v/s*)^k - 1 = Σ_{j=1}^{k} C(k,j)(v/s*)^j.
    fn h(&self, v: f64) -> (f64, f64) {
        let k = 2 * self.dim - 4;
        let (mut h, mut dh) = (0.0, 0.0);
        let mut binom = 1.0;
        for j in 1..=k {
            binom *= (k - j + 1) as f64 / j as f64;
            let c = binom / self.neck.powi(j as i32);
            h += c * v.powi(j as i32 - 1);
            if j >= 2 {
                dh += c * (j - 1) as f64 * v.powi(j as i32 - 2);
            }
        }
        (h, dh)
    }

    fn slope(&self, u: f64) -> f64 {
        -2.0 / self.h(u * u).0.sqrt()
    }

    /// Parameter reaching radius t on either sheet.
    pub fn parameter_at(&self, t: f64) -> f64 {
        (t - self.neck).max(0.0).sqrt()
    }
}

impl Meridian for FullCatenoid {
    fn dim(&self) -> usize {
        self.dim
    }
    fn range(&self) -> (f64, f64) {
        (-self.u_max, self.u_max)
    }
    fn jet(&self, u: f64) -> CurveJet {
        let x = self.center + crate::quadrature::adaptive(&|w: f64| self.slope(w), 0.0, u, 1e-14 * (1.0 + u.abs()));
        let (h, dh) = self.h(u * u);
        CurveJet { t: self.neck + u * u, x, dt: 2.0 * u, dx: self.slope(u), ddt: 2.0, ddx: 2.0 * u * dh / h.powf(1.5) }
    }
    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let k = (((b - a) / 0.25).ceil() as usize).max(8);
        (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
    }
}

/// Composite Gauss–Legendre nodes over a meridian parameter range.
pub fn meridian_nodes<M: Meridian + ?Sized>(m: &M, a: f64, b: f64, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let breaks = m.breaks(a, b);
    let mut out = Vec::with_capacity(breaks.len() * rule.order());
    for w in breaks.windows(2) {
        out.extend(rule.mapped(w[0], w[1]));
    }
    out
}

/// Euclidean area density |S^{n-2}|·t^{n-2}·|γ'| per unit σ.
pub fn area_density_bar(n: usize, j: &CurveJet) -> f64 {
    unit_sphere_area(n - 1) * j.t.abs().powi(n as i32 - 2) * j.speed()
}

/// ∫ dμ over the parameter range in g = ω·ḡ.
pub fn area_functional<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, a: f64, b: f64) -> Result<f64> {
    area_functional_with(m, metric, a, b, gl16())
}

pub fn area_functional_with<M: Meridian + ?Sized>(
    m: &M,
    metric: &AmbientMetric,
    a: f64,
    b: f64,
    rule: &GaussLegendre,
) -> Result<f64> {
    let n = m.dim();
    let mut acc = 0.0;
    for (s, w) in meridian_nodes(m, a, b, rule) {
        let j = m.jet(s);
        let x = metric.meridian_point(j.t, j.x);
        metric.check_domain(&x)?;
        let om = if metric.is_flat() { 1.0 } else { metric.omega_value(&x).powf(0.5 * (n as f64 - 1.0)) };
        acc += w * area_density_bar(n, &j) * om;
    }
    Ok(acc)
}

/// Per-node geometric data in g = ω·ḡ.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceNode {
    pub sigma: f64,
    pub weight: f64,
    pub jet: CurveJet,
    /// dμ̄ per dσ.
    pub area_bar: f64,
    pub omega: f64,
    /// ∂_N ln ω at the node.
    pub dlog_normal: f64,
}

impl SurfaceNode {
    pub fn area(&self, n: usize) -> f64 {
        self.area_bar * self.omega.powf(0.5 * (n as f64 - 1.0))
    }
}

/// Cached nodes with ambient data along a meridian.
pub struct SurfaceQuadrature {
    pub dim: usize,
    pub nodes: Vec<SurfaceNode>,
}

impl SurfaceQuadrature {
    pub fn new<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, a: f64, b: f64, rule: &GaussLegendre) -> Result<Self> {
        let n = m.dim();
        let mut nodes = Vec::new();
        for (s, w) in meridian_nodes(m, a, b, rule) {
            let j = m.jet(s);
            let x = metric.meridian_point(j.t, j.x);
            metric.check_domain(&x)?;
            let (omega, dlog) = if metric.is_flat() {
                (1.0, 0.0)
            } else {
                let wj = metric.omega_jet1(&x);
                let (nt, nx) = j.normal();
                (wj.v, (nt * wj.g[0] + nx * wj.g[n - 1]) / wj.v)
            };
            nodes.push(SurfaceNode { sigma: s, weight: w, jet: j, area_bar: area_density_bar(n, &j), omega, dlog_normal: dlog });
        }
        Ok(Self { dim: n, nodes })
    }

    pub fn area(&self) -> f64 {
        self.nodes.iter().map(|nd| nd.weight * nd.area(self.dim)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gl32, unit_ball_volume};

    #[test]
    fn plane_area_is_ball_volume() {
        let p = Plane { dim: 4, z: 1.0, radius: 30.0 };
        let a = area_functional(&p, &AmbientMetric::flat(4), 0.0, 30.0).unwrap();
        let exact = unit_ball_volume(3) * 30f64.powi(3);
        assert!((a - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn schwarzschild_area_exceeds_flat() {
        let p = Plane { dim: 4, z: 1.0, radius: 30.0 };
        let flat = area_functional(&p, &AmbientMetric::flat(4), 0.0, 30.0).unwrap();
        let s = area_functional(&p, &AmbientMetric::schwarzschild(4, 2.0), 0.0, 30.0).unwrap();
        assert!(s > flat);
    }

    #[test]
    fn sphere_area_and_curvatures() {
        let s = SphereArc::full(5, 0.3, 2.0);
        let a = area_functional(&s, &AmbientMetric::flat(5), 0.0, std::f64::consts::PI).unwrap();
        let exact = unit_sphere_area(5) * 2f64.powi(4);
        assert!((a - exact).abs() < 1e-12 * exact);
        let j = s.jet(0.7);
        assert!((j.kappa_meridian() - 0.5).abs() < 1e-14);
        assert!((j.kappa_rotation() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn full_catenoid_is_minimal() {
        let c = FullCatenoid { dim: 4, neck: 1.3, center: 0.5, u_max: 3.0 };
        let prof = CatenoidProfile::new(1.3f64.powi(2), 1.3 + 4.0, 0.0, 4).unwrap();
        for u in [-2.5, -0.4, 0.0, 0.3, 1.7] {
            let j = c.jet(u);
            assert!(j.mean_curvature_bar(4).abs() < 1e-10, "{u} {}", j.mean_curvature_bar(4));
            if u > 0.0 {
                let drop = prof.drop(1.3 + u * u, 1.3 + 9.0);
                let top = c.jet(3.0).x;
                assert!((j.x - (top + drop)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn area_self_convergence() {
        let c = CatenoidGraph { profile: CatenoidProfile::new(1.0, 2.0, 0.0, 4).unwrap(), t_lo: 1.5, t_hi: 50.0 };
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let a = area_functional_with(&c, &m, 1.5, 50.0, gl16()).unwrap();
        let b = area_functional_with(&c, &m, 1.5, 50.0, gl32()).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
    }
}
