//! ADM mass by flux integrals over coordinate spheres.

use serde::{Deserialize, Serialize};

use super::AmbientMetric;
use crate::error::{Error, Result};
use crate::quadrature::{unit_sphere_area, SphereRule};

/// Per-axis order of the angular product rule.
pub const SPHERE_ORDER: usize = 32;
/// Cap on the total number of angular nodes in high dimension.
pub const SPHERE_MAX_POINTS: usize = 1 << 20;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MassEstimate {
    pub radii: Vec<f64>,
    pub fluxes: Vec<f64>,
    /// Extrapolated λ → ∞ value.
    pub limit: f64,
    /// Difference of the last two fluxes.
    pub error: f64,
    /// Fitted exponent p in m(λ) = m_∞ + c·λ^{-p}; None when the tail is flat.
    pub fitted_rate: Option<f64>,
}

/// Σ_{i,j} xⁱ[∂_j g_ij - ∂_i g_jj] given dg(k, i, j) = ∂_k g_ij.
pub fn flux_density<D: Fn(usize, usize, usize) -> f64>(x: &[f64], dg: D) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut inner = 0.0;
        for j in 0..n {
            inner += dg(j, i, j) - dg(i, j, j);
        }
        acc += x[i] * inner;
    }
    acc
}

/// Normalized flux (2(m-1)|S^{m-1}|)^{-1}·λ^{-1}·∮_{S_λ} density dμ̄ in R^m for
/// a density that may fail (e.g. outside the domain).
pub fn normalized_flux<F: Fn(&[f64]) -> Result<f64>>(dim: usize, radius: f64, rule: &SphereRule, density: F) -> Result<f64> {
    let mut acc = 0.0;
    let mut x = vec![0.0; dim];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi = radius * pi;
        }
        acc += w * density(&x)?;
    }
    let area_scale = radius.powi(dim as i32 - 1);
    Ok(acc * area_scale / radius / (2.0 * (dim as f64 - 1.0) * unit_sphere_area(dim)))
}

/// Sphere rule used for flux integrals in R^dim.
pub fn flux_rule(dim: usize) -> SphereRule {
    SphereRule::new(dim, SphereRule::capped_order(dim, SPHERE_ORDER, SPHERE_MAX_POINTS))
}

/// ADM mass of a conformally flat metric over the given radius schedule.
pub fn adm_mass(metric: &AmbientMetric, radius_schedule: &[f64]) -> Result<MassEstimate> {
    let n = metric.dim;
    let rule = flux_rule(n);
    let fluxes = radius_schedule
        .iter()
        .map(|&lam| {
            normalized_flux(n, lam, &rule, |x| {
                metric.check_domain(x)?;
                if metric.is_flat() {
                    return Ok(0.0);
                }
                let w = metric.omega_jet1(x);
                // ∂_k g_ij = ∂_k ω δ_ij
                Ok(flux_density(x, |k, i, j| if i == j { w.g[k] } else { 0.0 }))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    extrapolate(radius_schedule, &fluxes)
}

/// Richardson-type limit of a flux sequence from its last three terms.
pub fn extrapolate(radii: &[f64], fluxes: &[f64]) -> Result<MassEstimate> {
    if radii.len() < 3 || radii.len() != fluxes.len() {
        return Err(Error::InvalidConfig("mass extrapolation needs at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("radius schedule must be increasing".into()));
    }
    let k = fluxes.len();
    let scale = fluxes.iter().fold(1e-300f64, |a, b| a.max(b.abs()));
    let floor = 1e-12 * scale.max(1.0);
    let diffs: Vec<f64> = fluxes.windows(2).map(|w| w[1] - w[0]).collect();
    for w in diffs.windows(2) {
        if w[1].abs() > w[0].abs() * (1.0 + 1e-6) + floor {
            return Err(Error::QuadratureDivergence(format!(
                "flux differences grow: {:.3e} -> {:.3e}",
                w[0], w[1]
            )));
        }
    }
    let (l1, l2, l3) = (radii[k - 3], radii[k - 2], radii[k - 1]);
    let (m1, m2, m3) = (fluxes[k - 3], fluxes[k - 2], fluxes[k - 1]);
    let (d1, d2) = (m2 - m1, m3 - m2);
    let error = d2.abs();
    if d1.abs() <= floor || d2.abs() <= floor || d1 * d2 <= 0.0 {
        return Ok(MassEstimate { radii: radii.to_vec(), fluxes: fluxes.to_vec(), limit: m3, error, fitted_rate: None });
    }
    let target = d2 / d1;
    let ratio = |p: f64| (l3.powf(-p) - l2.powf(-p)) / (l2.powf(-p) - l1.powf(-p));
    // ratio(p) decreases from its p→0 limit toward 0 as p grows
    let (mut lo, mut hi) = (1e-6, 60.0);
    if target >= ratio(lo) || target <= ratio(hi) {
        return Ok(MassEstimate { radii: radii.to_vec(), fluxes: fluxes.to_vec(), limit: m3, error, fitted_rate: None });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (l3.powf(-p) - l2.powf(-p));
    let limit = m3 - c * l3.powf(-p);
    Ok(MassEstimate { radii: radii.to_vec(), fluxes: fluxes.to_vec(), limit, error, fitted_rate: Some(p) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwarzschild_flux_closed_form() {
        // flux at λ equals m·φ(λ)^{(6-n)/(n-2)}
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let rule = flux_rule(4);
        for lam in [2.0, 8.0, 64.0] {
            let f = normalized_flux(4, lam, &rule, |x| {
                let w = m.omega_jet1(x);
                Ok(flux_density(x, |k, i, j| if i == j { w.g[k] } else { 0.0 }))
            })
            .unwrap();
            let phi: f64 = 1.0 + lam.powi(-2);
            assert!((f - 2.0 * phi).abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn flat_mass_is_zero() {
        let est = adm_mass(&AmbientMetric::flat(4), &[8.0, 16.0, 32.0]).unwrap();
        assert!(est.fluxes.iter().all(|f| f.abs() < 1e-10));
        assert!(est.limit.abs() < 1e-10);
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let radii = [8.0, 16.0, 32.0, 64.0];
        let fluxes: Vec<f64> = radii.iter().map(|l: &f64| 2.0 + 3.0 * l.powf(-1.7)).collect();
        let est = extrapolate(&radii, &fluxes).unwrap();
        assert!((est.limit - 2.0).abs() < 1e-10);
        assert!((est.fitted_rate.unwrap() - 1.7).abs() < 1e-8);
    }

    #[test]
    fn growing_differences_diverge() {
        let radii = [1.0, 2.0, 3.0, 4.0];
        let fluxes = [0.0, 1.0, 3.0, 6.0];
        assert!(matches!(extrapolate(&radii, &fluxes), Err(Error::QuadratureDivergence(_))));
    }
}
