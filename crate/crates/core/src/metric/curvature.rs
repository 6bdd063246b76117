//! Curvature of g = ω·ḡ through the conformal-change laws.
//!
//! With u = ½·ln ω (so g = e^{2u}ḡ):
//!   Ric = -(n-2)(∇²u - du⊗du) - (Δu + (n-2)|∇u|²)·ḡ,
//!   R   = (n-1)/ω² · [-Δω + (6-n)/4 · |∇ω|²/ω],
//! and for ω = φ^{4/(n-2)} the second law collapses to
//!   R = -4(n-1)/(n-2) · φ^{-(n+2)/(n-2)} · Δφ.

use super::AmbientMetric;
use crate::error::{Error, Result};
use crate::jet::{Jet1, Jet2};

/// Scalar curvature of g at x.
pub fn scalar_curvature(metric: &AmbientMetric, x: &[f64]) -> Result<f64> {
    metric.check_domain(x)?;
    let n = metric.dim as f64;
    let p = Jet2::point(x);
    if let Some(phi) = metric.phi(&p) {
        let k = -4.0 * (n - 1.0) / (n - 2.0);
        return Ok(k * phi.v.powf(-(n + 2.0) / (n - 2.0)) * phi.laplacian());
    }
    let w = metric.omega(&p);
    Ok((n - 1.0) / (w.v * w.v) * (-w.laplacian() + (6.0 - n) / 4.0 * w.grad_norm2() / w.v))
}

/// Coordinate components Ric_ij of g at x.
pub fn ricci_tensor(metric: &AmbientMetric, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    metric.check_domain(x)?;
    let dim = metric.dim;
    let n = dim as f64;
    let (_, du, ddu) = log_half_derivatives(metric, x);
    let lap: f64 = (0..dim).map(|i| ddu[i][i]).sum();
    let grad2: f64 = du.iter().map(|a| a * a).sum();
    let iso = lap + (n - 2.0) * grad2;
    let mut ric = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            ric[i][j] = -(n - 2.0) * (ddu[i][j] - du[i] * du[j]) - if i == j { iso } else { 0.0 };
        }
    }
    Ok(ric)
}

/// Ric(ν, ν) for a g-unit vector ν at x.
pub fn ricci_normal(metric: &AmbientMetric, x: &[f64], unit_normal: &[f64]) -> Result<f64> {
    metric.check_domain(x)?;
    let ric = ricci_tensor(metric, x)?;
    let w = metric.omega_value(x);
    let len2: f64 = w * unit_normal.iter().map(|a| a * a).sum::<f64>();
    if (len2.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitNormal { length: len2.sqrt() });
    }
    let mut acc = 0.0;
    for (i, row) in ric.iter().enumerate() {
        for (j, rij) in row.iter().enumerate() {
            acc += rij * unit_normal[i] * unit_normal[j];
        }
    }
    Ok(acc)
}

/// Ric(ν, ν) for ν = ω^{-1/2}·ν̄ given the Euclidean unit vector ν̄.
pub fn ricci_normal_euclidean(metric: &AmbientMetric, x: &[f64], nu_bar: &[f64]) -> Result<f64> {
    let w = metric.omega_value(x);
    let nu: Vec<f64> = nu_bar.iter().map(|a| a / w.sqrt()).collect();
    ricci_normal(metric, x, &nu)
}

/// Mean curvature in g from Euclidean data: H = ω^{-1/2}·(H̄ + (n-1)/2·∂_ν̄ ln ω),
/// equivalently φ^{2/(n-2)}·H = H̄ + 2(n-1)/(n-2)·φ^{-1}·∂_ν̄φ. Convention: H̄ = div ν̄.
pub fn mean_curvature_from_euclidean(
    metric: &AmbientMetric,
    x: &[f64],
    h_bar: f64,
    nu_bar: &[f64],
) -> Result<f64> {
    metric.check_domain(x)?;
    if metric.is_flat() {
        return Ok(h_bar);
    }
    let n = metric.dim as f64;
    let w = metric.omega(&Jet1::point(x));
    let dnu: f64 = nu_bar.iter().enumerate().map(|(i, a)| a * w.g[i]).sum();
    Ok(w.v.powf(-0.5) * (h_bar + 0.5 * (n - 1.0) * dnu / w.v))
}

/// ω, ∇u and ∇²u for u = ½·ln ω.
pub(crate) fn log_half_derivatives(metric: &AmbientMetric, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let dim = metric.dim;
    let j = metric.omega_jet2(x);
    let w = j.v;
    let du: Vec<f64> = (0..dim).map(|i| j.g[i] / (2.0 * w)).collect();
    let ddu = (0..dim)
        .map(|i| (0..dim).map(|k| j.h[i][k] / (2.0 * w) - j.g[i] * j.g[k] / (2.0 * w * w)).collect())
        .collect();
    (w, du, ddu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fd::{conformal_fd_curvature, FD_STEP};

    #[test]
    fn schwarzschild_is_scalar_flat() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        for x in [[1.0, 0.0, 0.0, 0.0], [1.2, -3.0, 0.5, 2.0], [40.0, 1.0, 0.0, -7.0]] {
            assert!(scalar_curvature(&m, &x).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn general_and_phi_forms_agree() {
        let m = AmbientMetric::hat_localized(5);
        let x = [0.3, 0.1, -0.4, 0.2, 0.9];
        let p = Jet2::point(&x);
        let w = m.omega(&p);
        let n = 5.0;
        let general = (n - 1.0) / (w.v * w.v) * (-w.laplacian() + (6.0 - n) / 4.0 * w.grad_norm2() / w.v);
        let phi_form = scalar_curvature(&m, &x).unwrap();
        assert!((general - phi_form).abs() < 1e-10 * phi_form.abs().max(1.0));
        assert!(phi_form > 0.0);
    }

    #[test]
    fn radial_ricci_matches_fd_oracle() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let x = [2.0, 0.0, 0.0, 0.0];
        let w = m.omega_value(&x);
        let nu = [1.0 / w.sqrt(), 0.0, 0.0, 0.0];
        let exact = ricci_normal(&m, &x, &nu).unwrap();
        let fd = conformal_fd_curvature(&m, &x, FD_STEP).unwrap();
        let approx: f64 = fd.ricci[0][0] * nu[0] * nu[0];
        assert!((exact - approx).abs() <= 1e-5 * exact.abs(), "{exact} vs {approx}");
    }

    #[test]
    fn ricci_trace_is_scalar_curvature() {
        let m = AmbientMetric::default_slab(4);
        let x = [0.4, -0.2, 0.1, 2.0];
        let ric = ricci_tensor(&m, &x).unwrap();
        let w = m.omega_value(&x);
        let trace: f64 = (0..4).map(|i| ric[i][i]).sum::<f64>() / w;
        let r = scalar_curvature(&m, &x).unwrap();
        assert!((trace - r).abs() < 1e-10 * r.abs().max(1.0));
    }

    #[test]
    fn non_unit_normal_rejected() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let r = ricci_normal(&m, &[2.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(r, Err(Error::NonUnitNormal { .. })));
    }

    #[test]
    fn horizon_is_minimal() {
        for n in 3..=7 {
            let m = AmbientMetric::schwarzschild(n, 2.0);
            let mut x = vec![0.0; n];
            x[n - 1] = 1.0;
            let h = mean_curvature_from_euclidean(&m, &x, n as f64 - 1.0, &x).unwrap();
            assert!(h.abs() < 1e-10, "n = {n}: {h}");
        }
    }
}
