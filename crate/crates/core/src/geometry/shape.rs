//! Principal curvatures of hypersurfaces of revolution in g = ω·ḡ.

use serde::{Deserialize, Serialize};

use super::{CurveJet, Meridian};
use crate::error::Result;
use crate::metric::AmbientMetric;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeData {
    /// Meridian curvature, then the (n-2)-fold rotational curvature.
    pub kappa_meridian: f64,
    pub kappa_rotation: f64,
    pub mean: f64,
    pub norm2: f64,
}

impl ShapeData {
    fn from_pair(n: usize, k1: f64, kr: f64) -> Self {
        let m = n as f64 - 2.0;
        Self { kappa_meridian: k1, kappa_rotation: kr, mean: k1 + m * kr, norm2: k1 * k1 + m * kr * kr }
    }

    pub fn principal(&self, n: usize) -> Vec<f64> {
        let mut v = vec![self.kappa_meridian];
        v.extend(std::iter::repeat(self.kappa_rotation).take(n - 2));
        v
    }
}

/// ω and ∂_N ln ω at a meridian point.
pub fn conformal_normal_data(metric: &AmbientMetric, j: &CurveJet) -> Result<(f64, f64)> {
    let n = metric.dim;
    let x = metric.meridian_point(j.t, j.x);
    metric.check_domain(&x)?;
    if metric.is_flat() {
        return Ok((1.0, 0.0));
    }
    let w = metric.omega_jet1(&x);
    let (nt, nx) = j.normal();
    Ok((w.v, (nt * w.g[0] + nx * w.g[n - 1]) / w.v))
}

/// Euclidean principal curvatures.
pub fn euclidean_shape(n: usize, j: &CurveJet) -> ShapeData {
    ShapeData::from_pair(n, j.kappa_meridian(), j.kappa_rotation())
}

/// κ_i = ω^{-1/2}(κ̄_i + ½∂_N ln ω) at parameter σ.
pub fn second_fundamental_form<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, sigma: f64) -> Result<ShapeData> {
    let j = m.jet(sigma);
    let (w, dlog) = conformal_normal_data(metric, &j)?;
    let s = w.powf(-0.5);
    Ok(ShapeData::from_pair(m.dim(), s * (j.kappa_meridian() + 0.5 * dlog), s * (j.kappa_rotation() + 0.5 * dlog)))
}

/// Principal curvatures from the first-order growth of g-lengths under the
/// normal push x + s·ω^{-1/2}N: rotational circles scale like √ω·t, meridian
/// chords like √ω·|Δγ|. Uses only ω values and curve positions.
pub fn second_fundamental_form_fd<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, sigma: f64, rel_step: f64) -> Result<ShapeData> {
    let n = m.dim();
    let j0 = m.jet(sigma);
    let scale = j0.t.hypot(j0.x).max(1.0);
    let h = rel_step * scale;
    let dsig = rel_step * scale / j0.speed();
    let omega = |t: f64, x: f64| -> Result<f64> {
        let p = metric.meridian_point(t, x);
        metric.check_domain(&p)?;
        Ok(metric.omega_value(&p))
    };
    let pushed = |sg: f64, s: f64| -> Result<(f64, f64)> {
        let j = m.jet(sg);
        let (nt, nx) = j.normal();
        let w = omega(j.t, j.x)?;
        Ok((j.t + s * nt / w.sqrt(), j.x + s * nx / w.sqrt()))
    };
    let rot = |s: f64| -> Result<f64> {
        let (t, x) = pushed(sigma, s)?;
        Ok((omega(t, x)?.sqrt() * t).ln())
    };
    let mer = |s: f64| -> Result<f64> {
        let (ta, xa) = pushed(sigma - dsig, s)?;
        let (tb, xb) = pushed(sigma + dsig, s)?;
        let (t, x) = pushed(sigma, s)?;
        Ok(((tb - ta).hypot(xb - xa) * omega(t, x)?.sqrt()).ln())
    };
    let k1 = (mer(h)? - mer(-h)?) / (2.0 * h);
    let kr = (rot(h)? - rot(-h)?) / (2.0 * h);
    Ok(ShapeData::from_pair(n, k1, kr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Plane, SphereArc};

    #[test]
    fn flat_plane_and_sphere() {
        let flat = AmbientMetric::flat(5);
        let p = second_fundamental_form(&Plane { dim: 5, z: 1.0, radius: 9.0 }, &flat, 3.0).unwrap();
        assert_eq!((p.norm2, p.mean), (0.0, 0.0));
        let rho = 2.5;
        let s = second_fundamental_form(&SphereArc::full(5, 0.0, rho), &flat, 1.1).unwrap();
        assert!((s.norm2 - 4.0 / (rho * rho)).abs() < 1e-14);
        assert!(s.principal(5).iter().all(|k| (k - 1.0 / rho).abs() < 1e-15));
    }

    #[test]
    fn fd_oracle_on_spheres() {
        for m in [AmbientMetric::flat(4), AmbientMetric::schwarzschild(4, 2.0), AmbientMetric::hat_localized(5)] {
            let sph = SphereArc::full(m.dim, 0.7, 3.0);
            for th in [0.4, 1.3, 2.6] {
                let a = second_fundamental_form(&sph, &m, th).unwrap();
                let b = second_fundamental_form_fd(&sph, &m, th, 1e-4).unwrap();
                assert!((a.norm2 - b.norm2).abs() < 1e-7 * a.norm2, "{a:?} {b:?}");
                assert!((a.mean - b.mean).abs() < 1e-7 * a.mean.abs(), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn schwarzschild_horizon_is_minimal() {
        let m = AmbientMetric::schwarzschild(6, 2.0);
        let s = second_fundamental_form(&SphereArc::full(6, 0.0, 1.0), &m, 0.9).unwrap();
        assert!(s.mean.abs() < 1e-13);
    }
}
