//! Pointwise Gauss trace identity and the Euclidean integration-by-parts
//! identity for the translation variation ū = ⟨e_n, ν̄⟩.

use super::shape::{euclidean_shape, second_fundamental_form};
use super::{area_density_bar, CurveJet, Meridian};
use crate::error::Result;
use crate::metric::{ricci_normal_euclidean, scalar_curvature, AmbientMetric};
use crate::quadrature::{gl16, unit_sphere_area};
use crate::report::CheckReport;

/// Intrinsic scalar curvature of the induced metric ω(L²dσ² + t²g_{S^{n-2}}),
/// written as dr² + ψ(r)²g_{S^{n-2}} with ψ = √ω·t and dr = √ω·L·dσ:
///   R_Σ = -2(k-1)ψ''/ψ + (k-1)(k-2)(1 - ψ'²)/ψ²,  k = n - 1.
pub fn intrinsic_scalar_curvature(metric: &AmbientMetric, j: &CurveJet) -> Result<f64> {
    let n = metric.dim;
    let x = metric.meridian_point(j.t, j.x);
    metric.check_domain(&x)?;
    let (w, w1, w2) = if metric.is_flat() {
        (1.0, 0.0, 0.0)
    } else {
        let jw = metric.omega_jet2(&x);
        let (a, b) = (0, n - 1);
        let w1 = jw.g[a] * j.dt + jw.g[b] * j.dx;
        let w2 = jw.h[a][a] * j.dt * j.dt + 2.0 * jw.h[a][b] * j.dt * j.dx + jw.h[b][b] * j.dx * j.dx
            + jw.g[a] * j.ddt
            + jw.g[b] * j.ddx;
        (jw.v, w1, w2)
    };
    // q = √ω along σ
    let q = w.sqrt();
    let q1 = w1 / (2.0 * q);
    let q2 = w2 / (2.0 * q) - w1 * w1 / (4.0 * w * q);
    let l = j.speed();
    let l1 = (j.dt * j.ddt + j.dx * j.ddx) / l;
    let psi = q * j.t;
    let psi1 = q1 * j.t + q * j.dt;
    let psi2 = q2 * j.t + 2.0 * q1 * j.dt + q * j.ddt;
    let sp = q * l;
    let sp1 = q1 * l + q * l1;
    let psi_r = psi1 / sp;
    let psi_rr = (psi2 * sp - psi1 * sp1) / (sp * sp * sp);
    let k = n as f64 - 1.0;
    Ok(-2.0 * (k - 1.0) * psi_rr / psi + (k - 1.0) * (k - 2.0) * (1.0 - psi_r * psi_r) / (psi * psi))
}

/// Residual of 2Ric(ν,ν) = R - R_Σ + H² - |h|² at each parameter, each term
/// by its own path, relative to the largest term.
pub fn gauss_trace_check<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, sigmas: &[f64]) -> Result<CheckReport> {
    let n = m.dim();
    let mut worst = 0.0f64;
    for &s in sigmas {
        let j = m.jet(s);
        let x = metric.meridian_point(j.t, j.x);
        let (nt, nx) = j.normal();
        let mut nu = vec![0.0; n];
        nu[0] = nt;
        nu[n - 1] = nx;
        let ric = if metric.is_flat() { 0.0 } else { ricci_normal_euclidean(metric, &x, &nu)? };
        let r = if metric.is_flat() { 0.0 } else { scalar_curvature(metric, &x)? };
        let rs = intrinsic_scalar_curvature(metric, &j)?;
        let sh = second_fundamental_form(m, metric, s)?;
        let terms = [2.0 * ric, r, rs, sh.mean * sh.mean, sh.norm2];
        let scale = terms.iter().fold(1e-300f64, |a, b| a.max(b.abs()));
        let res = (2.0 * ric - (r - rs + sh.mean * sh.mean - sh.norm2)).abs();
        worst = worst.max(if scale > 1e-300 { res / scale } else { 0.0 });
    }
    Ok(CheckReport::new("geometry.gauss_trace", "traced Gauss equation 2Ric(nu,nu) = R - R_Sigma + H^2 - |h|^2", worst, 1e-5)
        .metric("samples", sigmas.len() as f64))
}

/// Both sides of
///   ∫ H̄v̄ + H̄²ū² + |∇̄ū|² - |h̄|²ū² dμ̄ = ∮ h̄(ω̄, e_n^⊤)ū dl̄ - ∮ ⟨e_n^⊤, ω̄⟩H̄ū dl̄
/// with ū = ⟨e_n, ν̄⟩, v̄ = -h̄(e_n^⊤, e_n^⊤), over σ ∈ [a, b]; ends on the
/// axis are not boundary.
pub fn euclidean_ibp_sides<M: Meridian + ?Sized>(m: &M, a: f64, b: f64) -> (f64, f64) {
    let n = m.dim();
    let mut lhs = 0.0;
    for w in m.breaks(a, b).windows(2) {
        for (s, wt) in gl16().mapped(w[0], w[1]) {
            let j = m.jet(s);
            let sh = euclidean_shape(n, &j);
            let l = j.speed();
            let (_, tx) = j.tangent();
            let u = j.dt / l;
            let l1 = (j.dt * j.ddt + j.dx * j.ddx) / l;
            let du = (j.ddt * l - j.dt * l1) / (l * l) / l;
            let v = -sh.kappa_meridian * tx * tx;
            let integrand = sh.mean * v + sh.mean * sh.mean * u * u + du * du - sh.norm2 * u * u;
            lhs += wt * area_density_bar(n, &j) * integrand;
        }
    }
    let mut rhs = 0.0;
    for (s, sign) in [(a, -1.0), (b, 1.0)] {
        let j = m.jet(s);
        if j.t <= 1e-12 {
            continue;
        }
        let sh = euclidean_shape(n, &j);
        let (_, tx) = j.tangent();
        let u = j.normal().1;
        let len = unit_sphere_area(n - 1) * j.t.powi(n as i32 - 2);
        rhs += sign * len * (sh.kappa_meridian * tx * u - tx * sh.mean * u);
    }
    (lhs, rhs)
}

pub fn euclidean_ibp_check<M: Meridian + ?Sized>(m: &M, a: f64, b: f64) -> CheckReport {
    let (lhs, rhs) = euclidean_ibp_sides(m, a, b);
    let scale = lhs.abs().max(rhs.abs());
    let res = if scale > 1e-300 { (lhs - rhs).abs() / scale } else { 0.0 };
    CheckReport::new("geometry.euclidean_ibp", "integration by parts for the translation variation in flat space", res, 1e-6)
        .metric("interior", lhs)
        .metric("boundary", rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CatenoidGraph, Plane, SphereArc};
    use crate::profile::CatenoidProfile;

    #[test]
    fn sphere_intrinsic_curvature() {
        for metric in [AmbientMetric::flat(5)] {
            let s = SphereArc::full(5, 0.3, 2.0);
            let rs = intrinsic_scalar_curvature(&metric, &s.jet(1.0)).unwrap();
            assert!((rs - 12.0 / 4.0).abs() < 1e-12, "{rs}");
        }
        let r = gauss_trace_check(&SphereArc::full(4, 0.0, 1.7), &AmbientMetric::flat(4), &[0.5, 1.5, 2.5]).unwrap();
        assert!(r.passed && r.value < 1e-13);
    }

    #[test]
    fn gauss_trace_in_curved_backgrounds() {
        for metric in [AmbientMetric::schwarzschild(4, 2.0), AmbientMetric::hat_localized(5), AmbientMetric::default_slab(4)] {
            let s = SphereArc::full(metric.dim, 0.8, 2.5);
            let r = gauss_trace_check(&s, &metric, &[0.3, 1.0, 1.7, 2.8]).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn ibp_on_test_surfaces() {
        let plane = Plane { dim: 4, z: 1.0, radius: 10.0 };
        let (l, r) = euclidean_ibp_sides(&plane, 0.0, 10.0);
        assert_eq!((l, r), (0.0, 0.0));
        let cat = CatenoidGraph { profile: CatenoidProfile::new(1.0, 1.5, 0.0, 4).unwrap(), t_lo: 1.5, t_hi: 10.0 };
        assert!(euclidean_ibp_check(&cat, 1.5, 10.0).passed);
        let cap = SphereArc { dim: 4, center: 0.0, radius: 2.0, theta0: 0.0, theta1: 1.2 };
        let rep = euclidean_ibp_check(&cap, 0.0, 1.2);
        assert!(rep.passed, "{rep:?}");
    }
}
