//! Conformally flat ambient metrics g = ω·ḡ on (a region of) R^n.

pub mod curvature;
pub mod fd;
pub mod mass;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{norm2, Jet1, Jet2, Scalar, MAX_DIM};
use crate::perturbation::BumpChain;

pub use curvature::{mean_curvature_from_euclidean, ricci_normal, ricci_normal_euclidean, ricci_tensor, scalar_curvature};
pub use mass::{adm_mass, MassEstimate};

/// Smooth monotone step: 0 for t <= lo, 1 for t >= hi, the quintic smoothstep
/// in the rescaled variable in between (C^2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepCutoff {
    pub lo: f64,
    pub hi: f64,
}

impl Default for StepCutoff {
    fn default() -> Self {
        Self { lo: 0.5, hi: 1.0 }
    }
}

impl StepCutoff {
    /// Value and first two derivatives at `t`.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.lo {
            return (0.0, 0.0, 0.0);
        }
        if t >= self.hi {
            return (1.0, 0.0, 0.0);
        }
        let w = self.hi - self.lo;
        let u = (t - self.lo) / w;
        let v = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        let d1 = 30.0 * u * u * (1.0 - u) * (1.0 - u) / w;
        let d2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
        (v, d1, d2)
    }

    pub fn apply<S: Scalar>(&self, t: S) -> S {
        let (v, d1, d2) = self.eval3(t.value());
        t.chain(v, d1, d2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Flat,
    /// φ = 1 + (m/2)|x|^{2-n}, ω = φ^{4/(n-2)}.
    Schwarzschild {
        mass: f64,
        #[serde(default = "horizon_default")]
        horizon: bool,
    },
    /// ω = [1 + (1 + |x|^{2n-4})^{-1/2}]^{4/(n-2)}.
    HatLocalized,
    /// ω = 1 - (1-δ)·η(xⁿ/(1+|x'|²)^{1/2})·(1+δ|x|²)^{-τ̃/2}.
    SlabInterpolated {
        delta: f64,
        tau_tilde: f64,
        #[serde(default)]
        cutoff: StepCutoff,
    },
    /// ω = (1 + tδv)^{4/(n-2)}·ω_base.
    ConformallyPerturbed {
        base: Box<AmbientMetric>,
        chain: BumpChain,
        t: f64,
        delta: f64,
    },
}

fn horizon_default() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientMetric {
    pub dim: usize,
    #[serde(flatten)]
    pub family: Family,
}

/// Conformal factor with its first and second coordinate derivatives.
#[derive(Clone, Debug)]
pub struct FactorDerivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl AmbientMetric {
    pub fn flat(dim: usize) -> Self {
        Self { dim, family: Family::Flat }
    }

    pub fn schwarzschild(dim: usize, mass: f64) -> Self {
        Self { dim, family: Family::Schwarzschild { mass, horizon: true } }
    }

    pub fn hat_localized(dim: usize) -> Self {
        Self { dim, family: Family::HatLocalized }
    }

    pub fn slab(dim: usize, delta: f64, tau_tilde: f64) -> Self {
        Self {
            dim,
            family: Family::SlabInterpolated { delta, tau_tilde, cutoff: StepCutoff::default() },
        }
    }

    /// Slab metric with δ = 1/2 and τ̃ = 3(n-2)/4, inside the admissible window
    /// ((n-2)/2, n-2).
    pub fn default_slab(dim: usize) -> Self {
        Self::slab(dim, 0.5, 0.75 * (dim as f64 - 2.0))
    }

    pub fn perturbed(base: AmbientMetric, chain: BumpChain, t: f64, delta: f64) -> Self {
        Self {
            dim: base.dim,
            family: Family::ConformallyPerturbed { base: Box::new(base), chain, t, delta },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if !(3..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidConfig(format!("dimension {n} outside 3..=7")));
        }
        match &self.family {
            Family::Flat | Family::HatLocalized => Ok(()),
            Family::Schwarzschild { mass, .. } => {
                if *mass > 0.0 && mass.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("Schwarzschild mass {mass} must be positive")))
                }
            }
            Family::SlabInterpolated { delta, tau_tilde, cutoff } => {
                let nf = n as f64;
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(Error::InvalidConfig(format!("slab delta {delta} not in (0,1)")));
                }
                if !(*tau_tilde > (nf - 2.0) / 2.0 && *tau_tilde < nf - 2.0) {
                    return Err(Error::InvalidConfig(format!(
                        "slab tau_tilde {tau_tilde} not in ({}, {})",
                        (nf - 2.0) / 2.0,
                        nf - 2.0
                    )));
                }
                if !(cutoff.lo < cutoff.hi) {
                    return Err(Error::InvalidConfig("cutoff needs lo < hi".into()));
                }
                Ok(())
            }
            Family::ConformallyPerturbed { base, t, delta, .. } => {
                if base.dim != n {
                    return Err(Error::InvalidConfig("perturbation base dimension mismatch".into()));
                }
                if !(*t > 0.0 && *t < 1.0) || *delta <= 0.0 {
                    return Err(Error::InvalidConfig(format!("perturbation needs t in (0,1), delta > 0; got {t}, {delta}")));
                }
                base.validate()
            }
        }
    }

    /// Inner radius of the domain for horizon metrics.
    pub fn horizon_radius(&self) -> Option<f64> {
        match &self.family {
            Family::Schwarzschild { mass, horizon: true } => {
                Some((mass / 2.0).powf(1.0 / (self.dim as f64 - 2.0)))
            }
            Family::ConformallyPerturbed { base, .. } => base.horizon_radius(),
            _ => None,
        }
    }

    /// Decay rate τ of ω - 1 (metadata; infinite for the flat metric).
    pub fn decay_rate(&self) -> f64 {
        let n = self.dim as f64;
        match &self.family {
            Family::Flat => f64::INFINITY,
            Family::Schwarzschild { .. } | Family::HatLocalized => n - 2.0,
            Family::SlabInterpolated { tau_tilde, .. } => *tau_tilde,
            Family::ConformallyPerturbed { base, .. } => base.decay_rate(),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.family, Family::Flat)
    }

    /// True for Schwarzschild with m = 2, the case with a closed-form profile ODE.
    pub fn is_unit_horizon_schwarzschild(&self) -> bool {
        matches!(self.family, Family::Schwarzschild { mass, horizon: true } if (mass - 2.0).abs() < 1e-15)
    }

    /// Rotational symmetry about the last coordinate axis.
    pub fn is_axisymmetric(&self) -> bool {
        match &self.family {
            Family::ConformallyPerturbed { base, chain, .. } => {
                base.is_axisymmetric()
                    && chain.centers().iter().all(|q| q[..q.len() - 1].iter().all(|c| *c == 0.0))
            }
            _ => true,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if let Some(inner) = self.horizon_radius() {
            let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if radius < inner * (1.0 - 1e-12) {
                return Err(Error::PointOutsideDomain { radius, inner });
            }
        }
        Ok(())
    }

    /// ω evaluated generically; callers are responsible for domain checks.
    pub fn omega<S: Scalar>(&self, x: &[S]) -> S {
        let n = self.dim;
        let nf = n as f64;
        match &self.family {
            Family::Flat => S::constant(1.0, n),
            Family::Schwarzschild { .. } | Family::HatLocalized => {
                self.phi(x).expect("phi-form family").powf(4.0 / (nf - 2.0))
            }
            Family::SlabInterpolated { delta, tau_tilde, cutoff } => {
                let mut lateral = S::constant(1.0, n);
                for xi in &x[..n - 1] {
                    lateral = lateral + *xi * *xi;
                }
                let s = x[n - 1] / lateral.sqrt();
                let eta = cutoff.apply(s);
                if eta.value() == 0.0 {
                    // exact flat region: keep derivatives identically zero
                    return S::constant(1.0, n) - eta;
                }
                let decay = (norm2(x) * *delta + 1.0).powf(-tau_tilde / 2.0);
                -(eta * decay * (1.0 - delta)) + 1.0
            }
            Family::ConformallyPerturbed { base, chain, t, delta } => {
                let v = chain.field(base, x);
                let factor = (v * (t * delta) + 1.0).powf(4.0 / (nf - 2.0));
                factor * base.omega(x)
            }
        }
    }

    /// φ with ω = φ^{4/(n-2)} when the family has that form.
    pub fn phi<S: Scalar>(&self, x: &[S]) -> Option<S> {
        let n = self.dim;
        let nf = n as f64;
        match &self.family {
            Family::Flat => Some(S::constant(1.0, n)),
            Family::Schwarzschild { mass, .. } => {
                Some(norm2(x).powf((2.0 - nf) / 2.0) * (mass / 2.0) + 1.0)
            }
            Family::HatLocalized => {
                let r2k = norm2(x).powf(nf - 2.0);
                Some((r2k + 1.0).powf(-0.5) + 1.0)
            }
            Family::SlabInterpolated { .. } => None,
            Family::ConformallyPerturbed { base, chain, t, delta } => {
                let pb = base.phi(x)?;
                let v = chain.field(base, x);
                Some((v * (t * delta) + 1.0) * pb)
            }
        }
    }

    pub fn has_phi_form(&self) -> bool {
        match &self.family {
            Family::SlabInterpolated { .. } => false,
            Family::ConformallyPerturbed { base, .. } => base.has_phi_form(),
            _ => true,
        }
    }

    pub fn omega_value(&self, x: &[f64]) -> f64 {
        self.omega(x)
    }

    pub fn omega_jet1(&self, x: &[f64]) -> Jet1 {
        self.omega(&Jet1::point(x))
    }

    pub fn omega_jet2(&self, x: &[f64]) -> Jet2 {
        self.omega(&Jet2::point(x))
    }

    /// Value, gradient and Hessian of ω at `x`.
    pub fn eval_conformal_factor(&self, x: &[f64]) -> Result<FactorDerivatives> {
        self.check_domain(x)?;
        let j = self.omega_jet2(x);
        let n = self.dim;
        Ok(FactorDerivatives {
            value: j.v,
            gradient: j.g[..n].to_vec(),
            hessian: (0..n).map(|i| j.h[i][..n].to_vec()).collect(),
        })
    }

    /// Same quantities by central differences of ω (step h·max(1,|x|)); the
    /// fallback for fields without closed-form derivatives and the oracle for
    /// the closed-form path.
    pub fn eval_conformal_factor_fd(&self, x: &[f64], step: f64) -> Result<FactorDerivatives> {
        self.check_domain(x)?;
        let n = self.dim;
        let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let h = step * scale;
        let f = |y: &[f64]| self.omega_value(y);
        let value = f(x);
        let mut gradient = vec![0.0; n];
        let mut hessian = vec![vec![0.0; n]; n];
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            gradient[i] = (fp - fm) / (2.0 * h);
            hessian[i][i] = (fp - 2.0 * value + fm) / (h * h);
        }
        for i in 0..n {
            for j in 0..i {
                let mut acc = 0.0;
                for (si, sj, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    acc += sign * f(&y);
                }
                y[i] = x[i];
                y[j] = x[j];
                let hij = acc / (4.0 * h * h);
                hessian[i][j] = hij;
                hessian[j][i] = hij;
            }
        }
        Ok(FactorDerivatives { value, gradient, hessian })
    }

    /// Point (t, 0, ..., 0, h) of the meridian half-plane.
    pub fn meridian_point(&self, t: f64, height: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        x[0] = t;
        x[self.dim - 1] = height;
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_factor_is_exactly_one() {
        let m = AmbientMetric::flat(4);
        let d = m.eval_conformal_factor(&[0.3, -1.0, 2.0, 5.0]).unwrap();
        assert_eq!(d.value, 1.0);
        assert!(d.gradient.iter().all(|g| *g == 0.0));
        assert!(d.hessian.iter().flatten().all(|g| *g == 0.0));
    }

    #[test]
    fn schwarzschild_at_horizon() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let d = m.eval_conformal_factor(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((d.value - 4.0).abs() < 1e-14);
        assert_eq!(m.horizon_radius(), Some(1.0));
        assert!(matches!(
            m.eval_conformal_factor(&[0.5, 0.0, 0.0, 0.0]),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn schwarzschild_gradient_matches_central_differences() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let x = [2.0, 0.0, 0.0, 0.0];
        let a = m.eval_conformal_factor(&x).unwrap();
        let b = m.eval_conformal_factor_fd(&x, 1e-4).unwrap();
        for i in 0..4 {
            let scale = a.gradient[0].abs();
            assert!((a.gradient[i] - b.gradient[i]).abs() <= 1e-6 * scale, "{i}");
        }
    }

    #[test]
    fn slab_is_flat_in_lower_half_space() {
        let m = AmbientMetric::default_slab(4);
        for x in [[1.0, 2.0, -3.0, 0.0], [0.0, 0.0, 0.0, -1e-3], [10.0, 0.0, 0.0, -50.0]] {
            let d = m.eval_conformal_factor(&x).unwrap();
            assert_eq!(d.value, 1.0);
            assert!(d.gradient.iter().all(|g| *g == 0.0));
        }
        // inside the cone the factor drops below one
        let d = m.eval_conformal_factor(&[0.0, 0.0, 0.0, 3.0]).unwrap();
        assert!(d.value < 1.0 && d.value > 0.0);
    }

    #[test]
    fn cutoff_profile() {
        let c = StepCutoff::default();
        assert_eq!(c.eval3(0.5).0, 0.0);
        assert_eq!(c.eval3(1.0).0, 1.0);
        let mut prev = 0.0;
        for i in 0..=200 {
            let t = 0.4 + 0.7 * i as f64 / 200.0;
            let (v, d1, _) = c.eval3(t);
            assert!(v >= prev && d1 >= 0.0);
            prev = v;
        }
        // second derivative continuous at the ends
        assert!(c.eval3(0.5 + 1e-9).2.abs() < 1e-6);
        assert!(c.eval3(1.0 - 1e-9).2.abs() < 1e-6);
    }
}
