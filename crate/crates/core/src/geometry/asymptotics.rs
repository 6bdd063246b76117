//! Large-|x| behavior: mass of the induced metric on a graph, the
//! coordinate-ball isoperimetric ratio, and decay of the discrepancies between
//! g-geometry and Euclidean geometry along a tail.

use super::shape::{euclidean_shape, second_fundamental_form};
use super::GraphProfile;
use crate::error::{Error, Result};
use crate::fit::{log_grid, power_fit};
use crate::metric::mass::{extrapolate, flux_density, flux_rule, normalized_flux};
use crate::metric::{AmbientMetric, MassEstimate};
use crate::quadrature::{gl16, graded_breaks, unit_ball_volume, unit_sphere_area, SphereRule};
use crate::report::CheckReport;

/// Induced metric data on the graph y ↦ (y, f(|y|)) at radius λ:
/// γ_ab = A·δ_ab + B·ŷ_aŷ_b with radial derivatives A', B'.
#[derive(Clone, Copy, Debug)]
struct InducedRadial {
    a1: f64,
    b: f64,
    b1: f64,
}

fn induced_radial<G: GraphProfile + ?Sized>(g: &G, metric: &AmbientMetric, lam: f64) -> Result<InducedRadial> {
    let n = metric.dim;
    let (f, p, f2) = g.graph(lam);
    let x = metric.meridian_point(lam, f);
    metric.check_domain(&x)?;
    let (w, a1) = if metric.is_flat() {
        (1.0, 0.0)
    } else {
        let j = metric.omega_jet1(&x);
        (j.v, j.g[0] + p * j.g[n - 1])
    };
    Ok(InducedRadial { a1, b: w * p * p, b1: a1 * p * p + 2.0 * w * p * f2 })
}

/// Normalized flux of the induced metric over the circle |y| = λ in R^{n-1},
/// by angular quadrature of Σ yᵃ[∂_b γ_ab - ∂_a γ_bb].
fn induced_flux<G: GraphProfile + ?Sized>(g: &G, metric: &AmbientMetric, lam: f64, rule: &SphereRule) -> Result<f64> {
    let k = metric.dim - 1;
    let d = induced_radial(g, metric, lam)?;
    normalized_flux(k, lam, rule, |y| {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let yh: Vec<f64> = y.iter().map(|v| v / r).collect();
        let dy = |c: usize, a: usize| (if a == c { 1.0 } else { 0.0 } - yh[a] * yh[c]) / r;
        Ok(flux_density(y, |c, a, b| {
            let delta = if a == b { 1.0 } else { 0.0 };
            d.a1 * yh[c] * delta + d.b1 * yh[c] * yh[a] * yh[b] + d.b * (dy(c, a) * yh[b] + yh[a] * dy(c, b))
        }))
    })
}

/// Same flux after contracting by hand: λ^{k-2}(B - λA')/2 with k = n - 1.
pub fn induced_flux_radial<G: GraphProfile + ?Sized>(g: &G, metric: &AmbientMetric, lam: f64) -> Result<f64> {
    let k = (metric.dim - 1) as i32;
    let d = induced_radial(g, metric, lam)?;
    Ok(lam.powi(k - 2) * (d.b - lam * d.a1) / 2.0)
}

/// Mass of the induced metric on a radial graph, extrapolated over `radii`.
pub fn induced_mass<G: GraphProfile + ?Sized>(g: &G, metric: &AmbientMetric, radii: &[f64]) -> Result<MassEstimate> {
    if radii.len() < 3 {
        return Err(Error::TailTooShort(format!("{} radii; need at least 3", radii.len())));
    }
    let hi = g.t_range().1;
    if let Some(l) = radii.iter().find(|&&l| l > hi) {
        return Err(Error::TailTooShort(format!("radius {l} beyond graph range {hi}")));
    }
    if metric.dim < 4 {
        return Err(Error::InvalidConfig("induced mass needs n >= 4".into()));
    }
    let rule = flux_rule(metric.dim - 1);
    let fluxes = radii.iter().map(|&l| induced_flux(g, metric, l, &rule)).collect::<Result<Vec<_>>>()?;
    extrapolate(radii, &fluxes)
}

/// Induced mass consistent with zero: |limit| ≤ max(error bar, 1e-12), plus
/// agreement of the quadrature flux with the contracted radial form.
pub fn induced_mass_check<G: GraphProfile + ?Sized>(g: &G, metric: &AmbientMetric, radii: &[f64]) -> Result<CheckReport> {
    let est = induced_mass(g, metric, radii)?;
    let mut cross = 0.0f64;
    for (&l, &m) in radii.iter().zip(&est.fluxes) {
        let r = induced_flux_radial(g, metric, l)?;
        cross = cross.max((r - m).abs() / r.abs().max(m.abs()).max(1e-300));
    }
    let bar = est.error.max(1e-12);
    Ok(CheckReport::new("asymptotics.induced_mass", "induced metric on a leaf is asymptotically flat with mass zero", est.limit.abs(), bar)
        .metric("limit", est.limit)
        .metric("error", est.error)
        .metric("last_flux", *est.fluxes.last().unwrap())
        .metric("radial_cross_check", cross))
}

/// Radial panels from `lo` to `hi`, dense near `lo`.
fn radial_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let unit = (4.0f64).min(hi - lo);
    graded_breaks(lo, hi, unit, 8, 1.25)
}

/// Angular average ∮ F(ρθ) dθ over S^{n-1}; axisymmetric metrics use the
/// polar angle alone.
fn sphere_integral<F: Fn(&[f64]) -> f64>(n: usize, rho: f64, axisym: bool, rule: Option<&SphereRule>, f: F) -> f64 {
    if axisym {
        let mut acc = 0.0;
        let mut x = vec![0.0; n];
        for w in [0.0, 0.25, 0.5, 0.75, 1.0].windows(2) {
            for (th, wt) in gl16().mapped(w[0] * std::f64::consts::PI, w[1] * std::f64::consts::PI) {
                let (s, c) = th.sin_cos();
                x[0] = rho * s;
                x[n - 1] = rho * c;
                acc += wt * s.powi(n as i32 - 2) * f(&x);
            }
        }
        return acc * unit_sphere_area(n - 1);
    }
    let rule = rule.expect("sphere rule for non-axisymmetric metric");
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi = rho * pi;
        }
        acc += w * f(&x);
    }
    acc
}

/// (ω_n^{-1}V)^{(1-n)/n}·A for the coordinate balls B_r outside the horizon.
pub fn ball_ratios(metric: &AmbientMetric, radii: &[f64]) -> Result<Vec<f64>> {
    let n = metric.dim;
    let axisym = metric.is_axisymmetric();
    let rule = (!axisym).then(|| SphereRule::new(n, SphereRule::capped_order(n, 12, 1 << 16)));
    let inner = metric.horizon_radius().unwrap_or(0.0);
    let wn = unit_ball_volume(n);
    let ef = 0.5 * n as f64;
    let ea = 0.5 * (n as f64 - 1.0);
    let mut out = Vec::with_capacity(radii.len());
    let mut vol = 0.0;
    let mut from = inner;
    for &r in radii {
        if r <= from {
            return Err(Error::InvalidConfig(format!("radius {r} must exceed {from}")));
        }
        for w in radial_breaks(from, r).windows(2) {
            for (rho, wt) in gl16().mapped(w[0], w[1]) {
                vol += wt * rho.powi(n as i32 - 1) * sphere_integral(n, rho, axisym, rule.as_ref(), |x| metric.omega_value(x).powf(ef));
            }
        }
        from = r;
        let area = r.powi(n as i32 - 1) * sphere_integral(n, r, axisym, rule.as_ref(), |x| metric.omega_value(x).powf(ea));
        out.push((vol / wn).powf((1.0 - n as f64) / n as f64) * area);
    }
    Ok(out)
}

/// Coordinate balls witness A(V) ≤ nω_n(V/ω_n)^{(n-1)/n}(1 + o(1)): the ratio
/// reaches nω_n within 1% at the last radius and approaches it monotonically
/// in distance.
pub fn ball_isoperimetric_witness(metric: &AmbientMetric, radii: &[f64]) -> Result<CheckReport> {
    if radii.is_empty() {
        return Err(Error::InvalidConfig("empty radius schedule".into()));
    }
    let n = metric.dim;
    let target = n as f64 * unit_ball_volume(n);
    let ratios = ball_ratios(metric, radii)?;
    let gaps: Vec<f64> = ratios.iter().map(|q| (q / target - 1.0).abs()).collect();
    let growth = gaps.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    let last = *gaps.last().unwrap();
    let mut rep = CheckReport::new("asymptotics.ball_isoperimetric", "isoperimetric profile A(V) = n omega_n + o(1) along coordinate balls", last, 0.01)
        .metric("last_ratio", *ratios.last().unwrap())
        .metric("target", target)
        .metric("max_gap_growth", growth);
    if growth > 1e-12 {
        rep.value = f64::INFINITY;
        rep.note = format!("relative gap to n omega_n grew by {growth:.3e}");
        rep.refresh();
    }
    Ok(rep)
}

/// Decay of |ν - ν̄| = |ω^{-1/2} - 1|, |dμ/dμ̄ - 1| = |ω^{(n-1)/2} - 1| and
/// ρ·max_i|κ_i - κ̄_i| along the tail [t_lo, t_hi]. The first two fitted
/// exponents must be within 0.3 of -τ; the curvature term decays at least
/// that fast.
pub fn geometric_expansion_check<G: GraphProfile>(g: &G, metric: &AmbientMetric, t_lo: f64, t_hi: f64) -> Result<CheckReport> {
    let (a, b) = g.t_range();
    if t_lo < a || t_hi > b || t_hi < 2.0 * t_lo || t_lo <= 0.0 {
        return Err(Error::TailTooShort(format!("tail [{t_lo}, {t_hi}] inside range [{a}, {b}]")));
    }
    let n = metric.dim;
    let ts = log_grid(t_lo, t_hi, 24);
    let (mut rho, mut dn, mut dm, mut dh) = (vec![], vec![], vec![], vec![]);
    for &t in &ts {
        let (f, _, _) = g.graph(t);
        let x = metric.meridian_point(t, f);
        metric.check_domain(&x)?;
        let w = metric.omega_value(&x);
        let sh = second_fundamental_form(g, metric, t)?;
        let j = super::Meridian::jet(g, t);
        let eb = euclidean_shape(n, &j);
        let r = t.hypot(f);
        rho.push(r);
        dn.push((w.powf(-0.5) - 1.0).abs());
        dm.push((w.powf(0.5 * (n as f64 - 1.0)) - 1.0).abs());
        dh.push(r * (sh.kappa_meridian - eb.kappa_meridian).abs().max((sh.kappa_rotation - eb.kappa_rotation).abs()));
    }
    let tau = metric.decay_rate();
    let tol = 0.3;
    let mut rep = CheckReport::new("asymptotics.geometric_expansion", "normal, area element and second fundamental form deviate by O(|x|^-tau)", 0.0, tol);
    let mut worst = 0.0f64;
    for (name, ys, two_sided) in [("normal", &dn, true), ("area", &dm, true), ("shape", &dh, false)] {
        if ys.iter().all(|y| *y == 0.0) {
            continue;
        }
        let Some(fit) = power_fit(&rho, ys) else {
            return Err(Error::TailTooShort(format!("{name} discrepancy has fewer than 3 nonzero samples")));
        };
        let excess = if two_sided { (fit.exponent + tau).abs() } else { (fit.exponent + tau).max(0.0) };
        worst = worst.max(excess);
        rep = rep.metric(format!("{name}_exponent"), fit.exponent).metric(format!("{name}_max"), ys.iter().cloned().fold(0.0, f64::max));
    }
    rep.value = worst;
    rep.refresh();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Plane;

    #[test]
    fn flat_cases_are_exact() {
        let flat = AmbientMetric::flat(4);
        let p = Plane { dim: 4, z: 1.0, radius: 1000.0 };
        let m = induced_mass(&p, &flat, &[100.0, 200.0, 400.0]).unwrap();
        assert_eq!(m.limit, 0.0);
        let q = ball_ratios(&AmbientMetric::flat(5), &[1.0, 3.0]).unwrap();
        let target = 5.0 * unit_ball_volume(5);
        assert!(q.iter().all(|x| (x / target - 1.0).abs() < 1e-13), "{q:?}");
        let rep = geometric_expansion_check(&p, &flat, 10.0, 100.0).unwrap();
        assert!(rep.passed && rep.value == 0.0);
    }

    #[test]
    fn plane_in_schwarzschild_has_zero_induced_mass() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let p = Plane { dim: 4, z: 1.0, radius: 1e4 };
        let radii: Vec<f64> = (0..7).map(|k| 8.0 * 2f64.powi(k)).collect();
        let rep = induced_mass_check(&p, &m, &radii).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["radial_cross_check"] < 1e-10, "{rep:?}");
    }

    #[test]
    fn schwarzschild_ball_ratio_converges() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let radii: Vec<f64> = (2..=8).map(|k| 2f64.powi(k)).collect();
        let rep = ball_isoperimetric_witness(&m, &radii).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn plane_expansion_rates() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let p = Plane { dim: 4, z: 1.0, radius: 1e4 };
        let rep = geometric_expansion_check(&p, &m, 50.0, 1000.0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.metrics["normal_exponent"] + 2.0).abs() < 0.05);
    }

    #[test]
    fn short_tail_rejected() {
        let p = Plane { dim: 4, z: 1.0, radius: 100.0 };
        let m = AmbientMetric::schwarzschild(4, 2.0);
        assert!(matches!(induced_mass(&p, &m, &[10.0, 20.0]), Err(Error::TailTooShort(_))));
        assert!(matches!(induced_mass(&p, &m, &[50.0, 100.0, 200.0]), Err(Error::TailTooShort(_))));
        assert!(matches!(geometric_expansion_check(&p, &m, 60.0, 100.0), Err(Error::TailTooShort(_))));
    }
}
