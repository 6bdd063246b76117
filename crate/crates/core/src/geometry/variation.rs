//! Second variation of area along axisymmetric normal variations, and the
//! quadratic form for asymptotically constant variations.

use serde::{Deserialize, Serialize};

use super::shape::{conformal_normal_data, second_fundamental_form};
use super::{area_density_bar, Meridian};
use crate::error::{Error, Result};
use crate::fit::{log_grid, power_fit};
use crate::metric::{ricci_normal_euclidean, AmbientMetric};
use crate::quadrature::{gl16, GaussLegendre};

/// Scalar function of the meridian parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape1d {
    Constant { value: f64 },
    /// amplitude·(1 - s²)⁴ with s mapping [lo, hi] onto [-1, 1]; zero outside.
    Bump { lo: f64, hi: f64, amplitude: f64 },
    /// Σ c_k σ^k.
    Polynomial { coefficients: Vec<f64> },
}

impl Shape1d {
    /// (value, first derivative).
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Shape1d::Constant { value } => (*value, 0.0),
            Shape1d::Bump { lo, hi, amplitude } => {
                let half = 0.5 * (hi - lo);
                let s = (x - 0.5 * (lo + hi)) / half;
                if s.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - s * s;
                (amplitude * q.powi(4), amplitude * -8.0 * s * q.powi(3) / half)
            }
            Shape1d::Polynomial { coefficients } => {
                let (mut v, mut d) = (0.0, 0.0);
                for c in coefficients.iter().rev() {
                    d = d * x + v;
                    v = v * x + c;
                }
                (v, d)
            }
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Shape1d::Bump { lo, hi, .. } => Some((*lo, *hi)),
            _ => None,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Shape1d::Constant { value } => Shape1d::Constant { value: k * value },
            Shape1d::Bump { lo, hi, amplitude } => Shape1d::Bump { lo: *lo, hi: *hi, amplitude: k * amplitude },
            Shape1d::Polynomial { coefficients } => Shape1d::Polynomial { coefficients: coefficients.iter().map(|c| k * c).collect() },
        }
    }
}

/// Initial velocity u and acceleration v of a normal variation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationTestFunction {
    pub u: Shape1d,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Shape1d>,
}

impl VariationTestFunction {
    pub fn new(u: Shape1d) -> Self {
        Self { u, v: None }
    }

    pub fn with_acceleration(mut self, v: Shape1d) -> Self {
        self.v = Some(v);
        self
    }

    pub fn compactly_supported(&self) -> bool {
        self.u.support().is_some() && self.v.as_ref().map_or(true, |v| v.support().is_some())
    }

    fn accel(&self, x: f64) -> f64 {
        self.v.as_ref().map_or(0.0, |v| v.eval(x).0)
    }

    /// Smallest interval containing both supports, clipped to [a, b].
    fn active(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in std::iter::once(&self.u).chain(self.v.as_ref()) {
            let (l, h) = s.support().unwrap_or((a, b));
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo.max(a), hi.min(b))
    }
}

fn merged_breaks<M: Meridian + ?Sized>(m: &M, a: f64, b: f64, extra: &[(f64, f64)]) -> Vec<f64> {
    let mut br = m.breaks(a, b);
    for &(lo, hi) in extra {
        let (lo, hi) = (lo.max(a), hi.min(b));
        if hi > lo {
            br.extend((0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0));
        }
    }
    br.sort_by(f64::total_cmp);
    br.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * (1.0 + x.abs()));
    br
}

fn supports(tf: &VariationTestFunction) -> Vec<(f64, f64)> {
    std::iter::once(&tf.u).chain(tf.v.as_ref()).filter_map(|s| s.support()).collect()
}

/// Per-node quantities for the second-variation integrand.
struct VariationNode {
    weight: f64,
    sigma: f64,
    dmu: f64,
    mean: f64,
    norm2: f64,
    ricci: f64,
    /// |∇σ|² in the induced metric.
    grad_sigma2: f64,
}

fn variation_nodes<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, breaks: &[f64], rule: &GaussLegendre) -> Result<Vec<VariationNode>> {
    let n = m.dim();
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for (s, wt) in rule.mapped(w[0], w[1]) {
            let j = m.jet(s);
            let (om, _) = conformal_normal_data(metric, &j)?;
            let shape = second_fundamental_form(m, metric, s)?;
            let x = metric.meridian_point(j.t, j.x);
            let (nt, nx) = j.normal();
            let mut nu = vec![0.0; n];
            nu[0] = nt;
            nu[n - 1] = nx;
            let ricci = if metric.is_flat() { 0.0 } else { ricci_normal_euclidean(metric, &x, &nu)? };
            let l = j.speed();
            out.push(VariationNode {
                weight: wt,
                sigma: s,
                dmu: area_density_bar(n, &j) * om.powf(0.5 * (n as f64 - 1.0)),
                mean: shape.mean,
                norm2: shape.norm2,
                ricci,
                grad_sigma2: 1.0 / (om * l * l),
            });
        }
    }
    Ok(out)
}

/// ∫ [H·v + H²u² + |∇u|² - (|h|² + Ric(ν,ν))u²] dμ over σ ∈ [a, b].
pub fn second_variation<M: Meridian + ?Sized>(
    m: &M,
    metric: &AmbientMetric,
    tf: &VariationTestFunction,
    a: f64,
    b: f64,
) -> Result<f64> {
    let (a, b) = tf.active(a, b);
    let breaks = merged_breaks(m, a, b, &supports(tf));
    let nodes = variation_nodes(m, metric, &breaks, gl16())?;
    Ok(nodes
        .iter()
        .map(|nd| {
            let (u, du) = tf.u.eval(nd.sigma);
            let v = tf.accel(nd.sigma);
            let integrand = nd.mean * v + nd.mean * nd.mean * u * u + du * du * nd.grad_sigma2 - (nd.norm2 + nd.ricci) * u * u;
            nd.weight * integrand * nd.dmu
        })
        .sum())
}

/// Endpoint of the g-geodesic in the meridian plane leaving (t, x) along the
/// Euclidean unit direction (nt, nx), after g-length `len` (RK4, 16 steps).
pub fn geodesic_endpoint(metric: &AmbientMetric, t: f64, x: f64, nt: f64, nx: f64, len: f64) -> Result<(f64, f64)> {
    let n = metric.dim;
    if len == 0.0 || metric.is_flat() {
        return Ok((t + len * nt, x + len * nx));
    }
    let grad_phi = |p: &[f64; 4]| -> Result<(f64, f64)> {
        let pt = metric.meridian_point(p[0], p[1]);
        metric.check_domain(&pt)?;
        let w = metric.omega_jet1(&pt);
        Ok((0.5 * w.g[0] / w.v, 0.5 * w.g[n - 1] / w.v))
    };
    // ẍ = -2(∇φ·ẋ)ẋ + |ẋ|²∇φ with φ = ½ ln ω and g-unit initial speed
    let rhs = |p: &[f64; 4]| -> Result<[f64; 4]> {
        let (gt, gx) = grad_phi(p)?;
        let dot = gt * p[2] + gx * p[3];
        let sp2 = p[2] * p[2] + p[3] * p[3];
        Ok([p[2], p[3], -2.0 * dot * p[2] + sp2 * gt, -2.0 * dot * p[3] + sp2 * gx])
    };
    let w0 = metric.omega_value(&metric.meridian_point(t, x));
    let sgn = len.signum();
    let mut y = [t, x, sgn * nt / w0.sqrt(), sgn * nx / w0.sqrt()];
    let steps = 16;
    let h = len.abs() / steps as f64;
    let add = |a: &[f64; 4], k: &[f64; 4], c: f64| -> [f64; 4] { [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]] };
    for _ in 0..steps {
        let k1 = rhs(&y)?;
        let k2 = rhs(&add(&y, &k1, 0.5 * h))?;
        let k3 = rhs(&add(&y, &k2, 0.5 * h))?;
        let k4 = rhs(&add(&y, &k3, h))?;
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok((y[0], y[1]))
}

/// d²/ds² |Σ(s)| at s = 0 by a central second difference, where Σ(s) is the
/// geodesic normal graph of U(σ, s) = s·u + ½s²·v. Only the support of the
/// variation is integrated; the rest of Σ is unchanged.
pub fn second_variation_fd<M: Meridian + ?Sized>(
    m: &M,
    metric: &AmbientMetric,
    tf: &VariationTestFunction,
    a: f64,
    b: f64,
    s_step: f64,
) -> Result<f64> {
    let n = m.dim();
    let (a, b) = tf.active(a, b);
    let breaks = merged_breaks(m, a, b, &supports(tf));
    let endpoint = |sg: f64, s: f64| -> Result<(f64, f64)> {
        let j = m.jet(sg);
        let (nt, nx) = j.normal();
        let len = s * tf.u.eval(sg).0 + 0.5 * s * s * tf.accel(sg);
        geodesic_endpoint(metric, j.t, j.x, nt, nx, len)
    };
    let density = |sg: f64, s: f64| -> Result<f64> {
        let d = 1e-4 * sg.abs().max(1.0) / m.jet(sg).speed().max(1e-3);
        let (ta, xa) = endpoint(sg - d, s)?;
        let (tb, xb) = endpoint(sg + d, s)?;
        let (t, x) = endpoint(sg, s)?;
        let p = metric.meridian_point(t, x);
        metric.check_domain(&p)?;
        let om = metric.omega_value(&p);
        let speed = (tb - ta).hypot(xb - xa) / (2.0 * d);
        Ok(crate::quadrature::unit_sphere_area(n - 1) * t.abs().powi(n as i32 - 2) * speed * om.powf(0.5 * (n as f64 - 1.0)))
    };
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        for (sg, wt) in gl16().mapped(w[0], w[1]) {
            let d2 = density(sg, s_step)? - 2.0 * density(sg, 0.0)? + density(sg, -s_step)?;
            acc += wt * d2;
        }
    }
    Ok(acc / (s_step * s_step))
}

/// Pieces of Q(1 + u) = ∫|∇u|² - ∫(|h|² + Ric(ν,ν))(1 + u)².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcvValue {
    pub value: f64,
    /// ∫|∇u|² dμ.
    pub gradient: f64,
    /// ∫K dμ over the resolved range, K = |h|² + Ric(ν,ν).
    pub curvature: f64,
    /// ∫K·u dμ.
    pub linear: f64,
    /// ∫K·u² dμ.
    pub quadratic: f64,
    /// Fitted ∫K dμ beyond the resolved range.
    pub tail: f64,
    pub tail_exponent: Option<f64>,
}

/// Q(1 + u) on a graph leaf resolved on [0, b]. The tail of ∫K dμ past b
/// is the analytic integral of a power law fitted to the density on [b/2, b].
pub fn acv_functional<M: Meridian + ?Sized>(m: &M, metric: &AmbientMetric, u: &Shape1d, b: f64) -> Result<AcvValue> {
    let (a, _) = m.range();
    let mut extra = vec![];
    if let Some(s) = u.support() {
        if s.1 >= b {
            return Err(Error::InvalidConfig("test function must vanish before the end of the resolved range".into()));
        }
        extra.push(s);
    }
    let breaks = merged_breaks(m, a, b, &extra);
    let nodes = variation_nodes(m, metric, &breaks, gl16())?;
    let (mut g, mut c0, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0);
    for nd in &nodes {
        let (uv, du) = u.eval(nd.sigma);
        let k = nd.norm2 + nd.ricci;
        let wm = nd.weight * nd.dmu;
        g += wm * du * du * nd.grad_sigma2;
        c0 += wm * k;
        c1 += wm * k * uv;
        c2 += wm * k * uv * uv;
    }
    let ts = log_grid(0.5 * b, b, 16);
    let dens: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let j = m.jet(t);
            let (om, _) = conformal_normal_data(metric, &j)?;
            let sh = second_fundamental_form(m, metric, t)?;
            let x = metric.meridian_point(j.t, j.x);
            let (nt, nx) = j.normal();
            let mut nu = vec![0.0; m.dim()];
            nu[0] = nt;
            nu[m.dim() - 1] = nx;
            let ric = if metric.is_flat() { 0.0 } else { ricci_normal_euclidean(metric, &x, &nu)? };
            Ok((sh.norm2 + ric) * area_density_bar(m.dim(), &j) * om.powf(0.5 * (m.dim() as f64 - 1.0)))
        })
        .collect::<Result<_>>()?;
    let (tail, tail_exponent) = if dens.iter().all(|d| d.abs() < 1e-300) {
        (0.0, None)
    } else {
        let same_sign = dens.iter().all(|d| d.signum() == dens[0].signum());
        let fit = power_fit(&ts, &dens).filter(|f| same_sign && f.residual < 0.05 && f.exponent < -1.0);
        let Some(f) = fit else {
            let residual = power_fit(&ts, &dens).map_or(f64::INFINITY, |f| f.residual);
            return Err(Error::TailEstimateUnreliable { residual });
        };
        let beta = -f.exponent;
        (dens[0].signum() * f.amplitude * b.powf(1.0 - beta) / (beta - 1.0), Some(f.exponent))
    };
    let value = g - (c0 + tail) - 2.0 * c1 - c2;
    Ok(AcvValue { value, gradient: g, curvature: c0, linear: c1, quadratic: c2, tail, tail_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Plane, SphereArc};
    use crate::quadrature::unit_ball_volume;

    #[test]
    fn polynomial_and_bump_evaluation() {
        let p = Shape1d::Polynomial { coefficients: vec![1.0, 2.0, 3.0] };
        assert_eq!(p.eval(2.0), (17.0, 14.0));
        let b = Shape1d::Bump { lo: 1.0, hi: 3.0, amplitude: 2.0 };
        assert_eq!(b.eval(2.0), (2.0, 0.0));
        assert_eq!(b.eval(3.5), (0.0, 0.0));
        let h = 1e-6;
        let fd = (b.eval(2.4 + h).0 - b.eval(2.4 - h).0) / (2.0 * h);
        assert!((fd - b.eval(2.4).1).abs() < 1e-8);
    }

    #[test]
    fn sphere_closed_form() {
        for (n, rho) in [(4, 2.0), (5, 1.3), (7, 0.8)] {
            let s = SphereArc::full(n, 0.0, rho);
            let tf = VariationTestFunction::new(Shape1d::Constant { value: 1.0 });
            let q = second_variation(&s, &AmbientMetric::flat(n), &tf, 0.0, std::f64::consts::PI).unwrap();
            let nf = n as f64;
            let exact = nf * unit_ball_volume(n) * (nf - 1.0) * (nf - 2.0) * rho.powi(n as i32 - 3);
            assert!((q - exact).abs() < 1e-10 * exact, "{n}: {q} {exact}");
        }
    }

    #[test]
    fn plane_dirichlet_energy_nonnegative() {
        let p = Plane { dim: 4, z: 0.0, radius: 10.0 };
        let tf = VariationTestFunction::new(Shape1d::Bump { lo: 2.0, hi: 5.0, amplitude: 1.0 });
        assert!(second_variation(&p, &AmbientMetric::flat(4), &tf, 0.0, 10.0).unwrap() > 0.0);
    }

    #[test]
    fn fd_matches_formula_on_schwarzschild_sphere() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let s = SphereArc::full(4, 0.5, 3.0);
        let tf = VariationTestFunction::new(Shape1d::Bump { lo: 0.4, hi: 2.2, amplitude: 1.0 })
            .with_acceleration(Shape1d::Bump { lo: 0.8, hi: 2.5, amplitude: 0.7 });
        let a = second_variation(&s, &m, &tf, 0.0, std::f64::consts::PI).unwrap();
        let b = second_variation_fd(&s, &m, &tf, 0.0, std::f64::consts::PI, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-4 * a.abs(), "{a} {b}");
    }

    #[test]
    fn flat_geodesics_are_lines() {
        let (t, x) = geodesic_endpoint(&AmbientMetric::flat(4), 1.0, 2.0, 0.6, 0.8, 0.5).unwrap();
        assert!((t - 1.3).abs() < 1e-15 && (x - 2.4).abs() < 1e-15);
    }
}
