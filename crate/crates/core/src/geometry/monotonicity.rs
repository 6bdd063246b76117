//! Density ratios, the monotonicity identity for axis centers, and the
//! layer-cake bound, all in the Euclidean metric.
//!
//! For x0 = c·e_n, 0 < s < t, a hypersurface without boundary in B_t(x0)
//! and H̄ = div ν̄,
//!   t^{1-n}|B_t ∩ Σ| = s^{1-n}|B_s ∩ Σ| + ∫_{B_t∖B_s} ρ^{-1-n}⟨x - x0, ν̄⟩²
//!     + 1/(n-1)·∫_{B_t∖B_s} (t^{1-n} - ρ^{1-n})⟨x - x0, ν̄⟩H̄
//!     + 1/(n-1)·∫_{B_s} (t^{1-n} - s^{1-n})⟨x - x0, ν̄⟩H̄,
//! with ρ = |x - x0|.

use super::{area_density_bar, CurveJet, Meridian};
use crate::error::{Error, Result};
use crate::fit::power_fit;
use crate::quadrature::{gl16, unit_ball_volume};
use crate::report::CheckReport;

fn dist(j: &CurveJet, c: f64) -> f64 {
    j.t.hypot(j.x - c)
}

/// Parameters in [a, b] where |γ(σ) - c·e_n| crosses one of the radii.
fn crossings<M: Meridian + ?Sized>(m: &M, c: f64, radii: &[f64], breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        for i in 0..8 {
            fine.push(w[0] + (w[1] - w[0]) * i as f64 / 8.0);
        }
    }
    fine.push(*breaks.last().unwrap());
    for &rad in radii {
        let g = |s: f64| dist(&m.jet(s), c) - rad;
        for w in fine.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (glo, ghi) = (g(lo), g(hi));
            if glo == 0.0 {
                out.push(lo);
                continue;
            }
            if glo * ghi >= 0.0 {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) * glo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

/// ∫ f(jet, ρ) dμ̄ over the part of Σ where `inside(ρ)` holds. Panels are
/// split at every crossing of the given radii so each is on one side.
fn integrate_region<M, P, F>(m: &M, c: f64, radii: &[f64], inside: P, f: F) -> f64
where
    M: Meridian + ?Sized,
    P: Fn(f64) -> bool,
    F: Fn(&CurveJet, f64) -> f64,
{
    let (a, b) = m.range();
    let base = m.breaks(a, b);
    let mut br = base.clone();
    br.extend(crossings(m, c, radii, &base));
    br.sort_by(f64::total_cmp);
    br.dedup();
    let n = m.dim();
    let mut acc = 0.0;
    for w in br.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let mid = m.jet(0.5 * (w[0] + w[1]));
        if !inside(dist(&mid, c)) {
            continue;
        }
        for (s, wt) in gl16().mapped(w[0], w[1]) {
            let j = m.jet(s);
            let rho = dist(&j, c);
            acc += wt * area_density_bar(n, &j) * f(&j, rho);
        }
    }
    acc
}

/// Euclidean |B_R(c·e_n) ∩ Σ|.
pub fn ball_area<M: Meridian + ?Sized>(m: &M, c: f64, radius: f64) -> f64 {
    integrate_region(m, c, &[radius], |r| r < radius, |_, _| 1.0)
}

/// The surface must not have boundary inside the ball of the given radius.
fn require_closed_in_ball<M: Meridian + ?Sized>(m: &M, c: f64, radius: f64) -> Result<()> {
    let (a, b) = m.range();
    for s in [a, b] {
        let j = m.jet(s);
        if j.t > 1e-12 && dist(&j, c) < radius {
            return Err(Error::InsufficientRange(format!(
                "surface boundary at distance {:.4} lies inside the ball of radius {radius}",
                dist(&j, c)
            )));
        }
    }
    Ok(())
}

/// Evaluates both sides of the monotonicity identity for x0 = c·e_n.
pub fn monotonicity_check<M: Meridian + ?Sized>(m: &M, c: f64, s: f64, t: f64) -> Result<CheckReport> {
    if !(0.0 < s && s < t) {
        return Err(Error::InvalidConfig(format!("need 0 < s < t, got s = {s}, t = {t}")));
    }
    require_closed_in_ball(m, c, t)?;
    let (a, b) = m.range();
    let closest = m.breaks(a, b).iter().map(|&x| dist(&m.jet(x), c)).fold(f64::INFINITY, f64::min);
    if s < 1e-6 && closest < 1e-6 {
        return Err(Error::QuadratureSingularity(format!("center at distance {closest:.2e} from the surface with s = {s:.2e}")));
    }
    let n = m.dim();
    let nf = n as f64;
    let radial = |j: &CurveJet| {
        let (nt, nx) = j.normal();
        j.t * nt + (j.x - c) * nx
    };
    let lhs = t.powf(1.0 - nf) * ball_area(m, c, t);
    let inner = s.powf(1.0 - nf) * ball_area(m, c, s);
    let shell = |r: f64| r >= s && r < t;
    let excess = integrate_region(m, c, &[s, t], shell, |j, r| r.powf(-1.0 - nf) * radial(j).powi(2));
    let h_shell = integrate_region(m, c, &[s, t], shell, |j, r| {
        (t.powf(1.0 - nf) - r.powf(1.0 - nf)) * radial(j) * j.mean_curvature_bar(n)
    }) / (nf - 1.0);
    let h_core = integrate_region(m, c, &[s], |r| r < s, |j, _| radial(j) * j.mean_curvature_bar(n)) * (t.powf(1.0 - nf) - s.powf(1.0 - nf))
        / (nf - 1.0);
    let rhs = inner + excess + h_shell + h_core;
    let scale = lhs.abs().max(inner.abs() + excess.abs() + h_shell.abs() + h_core.abs()).max(1e-300);
    let residual = (lhs - rhs).abs() / scale;
    Ok(CheckReport::new(
        "geometry.monotonicity_identity",
        "monotonicity formula for x0 on the axis, 0 < s < t",
        residual,
        1e-6,
    )
    .metric("center", c)
    .metric("s", s)
    .metric("t", t)
    .metric("density_t", lhs)
    .metric("density_s", inner)
    .metric("excess", excess)
    .metric("mean_curvature_shell", h_shell)
    .metric("mean_curvature_core", h_core))
}

/// ∫_{B_t∖B_s} |x|^{-α} dμ̄ against c·t^{n-1-α} + cα/(n-1-α)·(t^{n-1-α} + s^{n-1-α}),
/// c = max(1, sup_{s<r<t} r^{1-n}|B_r ∩ Σ|) sampled on 65 log-spaced radii.
pub fn layer_cake_check<M: Meridian + ?Sized>(m: &M, alpha: f64, s: f64, t: f64) -> Result<CheckReport> {
    let n = m.dim();
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf - 1.0) {
        return Err(Error::ExponentOutOfRange { alpha, limit: nf - 1.0 });
    }
    if !(0.0 < s && s < t) {
        return Err(Error::InvalidConfig(format!("need 0 < s < t, got s = {s}, t = {t}")));
    }
    require_closed_in_ball(m, 0.0, t)?;
    let lhs = integrate_region(m, 0.0, &[s, t], |r| r >= s && r < t, |_, r| r.powf(-alpha));
    let c_meas = (0..=64)
        .map(|k| {
            let r = s * (t / s).powf(k as f64 / 64.0);
            r.powf(1.0 - nf) * ball_area(m, 0.0, r)
        })
        .fold(0.0, f64::max);
    let c = c_meas.max(1.0);
    let e = nf - 1.0 - alpha;
    let bound = c * t.powf(e) + c * alpha / e * (t.powf(e) + s.powf(e));
    Ok(CheckReport::new("geometry.layer_cake", "layer-cake bound on the integral of |x|^-alpha", lhs - bound, 0.0)
        .metric("integral", lhs)
        .metric("bound", bound)
        .metric("density_sup", c_meas)
        .metric("alpha", alpha))
}

/// Euclidean area ratios |B_s ∩ Σ|/(ω_{n-1}s^{n-1}) on the given grid.
pub fn area_ratios<M: Meridian + ?Sized>(m: &M, s_grid: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    let w = unit_ball_volume(n - 1);
    s_grid
        .iter()
        .map(|&s| {
            require_closed_in_ball(m, 0.0, s)?;
            Ok(ball_area(m, 0.0, s) / (w * s.powi(n as i32 - 1)))
        })
        .collect()
}

/// Area ratios tend to 1: within [0.8, 1.2] for s ≥ 10, closer to 1 at the
/// end of the grid than at the start, and with fitted approach exponents at
/// least as fast as 1 + O(s^{-τ}) from above and 1 - O(s^{-τ/(n-1)}) from below.
pub fn area_ratio_scan<M: Meridian + ?Sized>(m: &M, tau: f64, s_grid: &[f64]) -> Result<CheckReport> {
    if s_grid.len() < 3 || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InsufficientRange("area ratio scan needs an increasing grid of at least 3 radii".into()));
    }
    let n = m.dim() as f64;
    let ratios = area_ratios(m, s_grid)?;
    let mut violations = 0usize;
    for (s, q) in s_grid.iter().zip(&ratios) {
        if *s >= 10.0 && !(0.8..=1.2).contains(q) {
            violations += 1;
        }
    }
    let first = (ratios[0] - 1.0).abs();
    let last = (ratios[ratios.len() - 1] - 1.0).abs();
    if last > first + 1e-12 {
        violations += 1;
    }
    let half = s_grid.len() / 2;
    let (xs, qs) = (&s_grid[half..], &ratios[half..]);
    let above: Vec<f64> = qs.iter().map(|q| (q - 1.0).max(0.0)).collect();
    let below: Vec<f64> = qs.iter().map(|q| (1.0 - q).max(0.0)).collect();
    let mut rep = CheckReport::new("geometry.area_ratio", "area ratios tend to 1 at the stated rates", 0.0, 0.0);
    let limits = [("above", &above, -tau + 0.3), ("below", &below, -tau / (n - 1.0) + 0.3)];
    for (label, dev, limit) in limits {
        if dev.iter().filter(|d| **d > 1e-12).count() >= 3 {
            if let Some(f) = power_fit(xs, dev) {
                rep = rep.metric(format!("exponent_{label}"), f.exponent);
                if f.exponent > limit {
                    violations += 1;
                }
            }
        }
    }
    rep.value = violations as f64;
    rep.refresh();
    for (s, q) in s_grid.iter().zip(&ratios) {
        rep = rep.metric(format!("ratio_s={s}"), *q);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FullCatenoid, Plane, SphereArc};
    use crate::quadrature::unit_sphere_area;

    #[test]
    fn ball_area_of_plane_through_center() {
        let p = Plane { dim: 4, z: 0.0, radius: 50.0 };
        let a = ball_area(&p, 0.0, 7.3);
        assert!((a - unit_ball_volume(3) * 7.3f64.powi(3)).abs() < 1e-10 * a);
        // cap geometry at height 3
        let q = Plane { dim: 4, z: 3.0, radius: 50.0 };
        let b = ball_area(&q, 0.0, 5.0);
        assert!((b - unit_ball_volume(3) * 64.0).abs() < 1e-10 * b);
    }

    #[test]
    fn identity_on_offcenter_sphere() {
        let s = SphereArc::full(4, 0.0, 2.0);
        for (c, s0, t0) in [(0.5, 0.3, 4.0), (1.0, 1.5, 2.9), (-1.5, 0.2, 1.0)] {
            let r = monotonicity_check(&s, c, s0, t0).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!((ball_area(&s, 0.0, 3.0) - unit_sphere_area(4) * 8.0).abs() < 1e-10);
    }

    #[test]
    fn identity_on_catenoid() {
        let c = FullCatenoid { dim: 5, neck: 1.0, center: 0.0, u_max: 4.0 };
        for (x0, s0, t0) in [(0.0, 0.5, 6.0), (0.7, 1.2, 3.0)] {
            let r = monotonicity_check(&c, x0, s0, t0).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn layer_cake_rejects_large_alpha() {
        let p = Plane { dim: 4, z: 0.0, radius: 200.0 };
        assert!(matches!(layer_cake_check(&p, 3.0, 1.0, 100.0), Err(Error::ExponentOutOfRange { .. })));
        let r = layer_cake_check(&p, 1.0, 1.0, 100.0).unwrap();
        assert!(r.passed);
        let r = layer_cake_check(&p, 3.0 - 1e-3, 1.0, 100.0).unwrap();
        assert!(r.passed);
    }
}
