//! Closed-form solutions of the flat radial ODE and the associated tail integral.
//!
//! In the flat metric Q = t^{n-2}p/(1+p²)^{1/2} is conserved; Q = -a gives
//!   p(t) = -a/(t^{2n-4} - a²)^{1/2},
//!   f(t) = f(t_ref) - ∫_{t_ref}^{t} a/(s^{2n-4} - a²)^{1/2} ds,
//! defined for t > s* = a^{1/(n-2)}.

use super::ProfileState;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

/// (s^{2n-4} - a²)/a² = (s/s*)^{2n-4} - 1 without cancellation near s*.
fn excess(s: f64, s_star: f64, n: usize) -> f64 {
    ((2 * n - 4) as f64 * ((s - s_star) / s_star).ln_1p()).exp_m1()
}

/// Flat catenoid-type graph with Q ≡ -a through (t_ref, f_ref).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatenoidProfile {
    pub a: f64,
    pub t_ref: f64,
    pub f_ref: f64,
    pub n: usize,
}

impl CatenoidProfile {
    pub fn new(a: f64, t_ref: f64, f_ref: f64, n: usize) -> Result<Self> {
        let c = Self { a, t_ref, f_ref, n };
        c.check(t_ref)?;
        Ok(c)
    }

    /// Neck radius a^{1/(n-2)}.
    pub fn neck(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            self.a.powf(1.0 / (self.n as f64 - 2.0))
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.a < 0.0 {
            return Err(Error::InvalidConfig(format!("catenoid parameter a = {} must be >= 0", self.a)));
        }
        let singular = self.neck();
        if self.a > 0.0 && !(t > singular) {
            return Err(Error::SingularLowerLimit { t, singular });
        }
        Ok(())
    }

    pub fn slope(&self, t: f64) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        -1.0 / excess(t, self.neck(), self.n).sqrt()
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        // p = -a (t^k - a²)^{-1/2}, k = 2n-4
        let k = (2 * self.n - 4) as f64;
        let e = excess(t, self.neck(), self.n);
        let tk = self.a * self.a * (1.0 + e);
        0.5 * self.a * k * tk / t / (self.a * self.a * e).powf(1.5)
    }

    /// ∫_{t0}^{t1} a/(s^{2n-4} - a²)^{1/2} ds via s = s* + u².
    pub fn drop(&self, t0: f64, t1: f64) -> f64 {
        if self.a == 0.0 || t0 == t1 {
            return 0.0;
        }
        let s_star = self.neck();
        let (u0, u1) = ((t0 - s_star).sqrt(), (t1 - s_star).sqrt());
        let n = self.n;
        let g = |u: f64| {
            if u == 0.0 {
                // limit 2u/sqrt((2n-4)u²/s*)
                return 2.0 * (s_star / (2 * n - 4) as f64).sqrt();
            }
            let s = s_star + u * u;
            2.0 * u / excess(s, s_star, n).sqrt()
        };
        adaptive(&g, u0, u1, 1e-14 * (1.0 + (u1 - u0).abs()))
    }

    pub fn height(&self, t: f64) -> f64 {
        self.f_ref - self.drop(self.t_ref, t)
    }

    pub fn state(&self, t: f64) -> ProfileState {
        ProfileState { t, f: self.height(t), p: self.slope(t) }
    }
}

/// Samples of the flat solution with t^{n-2}p/(1+p²)^{1/2} = -a through (t_ref, f_ref).
pub fn flat_region_profile(a: f64, t_ref: f64, f_ref: f64, t_grid: &[f64], n: usize) -> Result<Vec<ProfileState>> {
    let c = CatenoidProfile::new(a, t_ref, f_ref, n)?;
    for &t in t_grid {
        c.check(t)?;
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let mut prev_t = t_ref;
    let mut prev_f = f_ref;
    for &t in t_grid {
        let f = prev_f - c.drop(prev_t, t);
        out.push(ProfileState { t, f, p: c.slope(t) });
        prev_t = t;
        prev_f = f;
    }
    Ok(out)
}

/// Integrand of I_n after s = 1/u, u = 1 - w²: 2w·u^{n-4}/(1 - u^{2n-4})^{1/2}.
fn tail_integrand(n: usize, w: f64) -> f64 {
    let k = (2 * n - 4) as f64;
    if w == 0.0 {
        return 2.0 / k.sqrt();
    }
    let u = 1.0 - w * w;
    let one_minus = -(k * (-w * w).ln_1p()).exp_m1();
    2.0 * w * u.powi(n as i32 - 4) / one_minus.sqrt()
}

/// I_n = ∫_1^∞ ds/(s^{2n-4} - 1)^{1/2}.
pub fn tail_integral(n: usize) -> f64 {
    assert!(n >= 4, "tail integral needs n >= 4");
    adaptive(&|w| tail_integrand(n, w), 0.0, 1.0, 1e-14)
}

/// Same integral by a single Gauss–Legendre rule of the given order.
pub fn tail_integral_gl(n: usize, order: usize) -> f64 {
    GaussLegendre::new(order).integrate(0.0, 1.0, |w| tail_integrand(n, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_integral_n4() {
        // ∫_0^1 du/(1-u⁴)^{1/2} = Γ(1/4)²/(4√(2π))
        let exact = 1.311_028_777_146_059_9;
        assert!((tail_integral(4) - exact).abs() < 1e-12);
        assert!(tail_integral(5) < tail_integral(4));
        assert!((tail_integral_gl(6, 40) - tail_integral_gl(6, 80)).abs() < 1e-10);
    }

    #[test]
    fn flat_profile_drop_matches_direct_quadrature() {
        // n = 4, a = 1: drop from 2 to ∞ is ∫_2^∞ ds/(s⁴-1)^{1/2}; compare on [2, 2e4]
        let c = CatenoidProfile::new(1.0, 2.0, 0.0, 4).unwrap();
        let direct = adaptive(&|s: f64| 1.0 / (s.powi(4) - 1.0).sqrt(), 2.0, 20000.0, 1e-14);
        assert!((c.drop(2.0, 20000.0) - direct).abs() < 1e-12);
    }

    #[test]
    fn conserved_quantity_along_samples() {
        let grid: Vec<f64> = (1..50).map(|k| 1.5 + k as f64).collect();
        for (n, a) in [(4, 1.0), (5, 0.3), (7, 2.0)] {
            let s = flat_region_profile(a, 1.5, 1.0, &grid, n).unwrap();
            for st in s {
                let q = st.t.powi(n as i32 - 2) * st.p / (1.0 + st.p * st.p).sqrt();
                assert!((q + a).abs() < 1e-10 * a.max(1.0), "{n} {a} {q}");
            }
        }
    }

    #[test]
    fn zero_parameter_is_a_plane() {
        let s = flat_region_profile(0.0, 1.0, 2.5, &[1.0, 10.0, 100.0], 4).unwrap();
        assert!(s.iter().all(|p| p.f == 2.5 && p.p == 0.0));
    }

    #[test]
    fn below_neck_rejected() {
        assert!(matches!(
            flat_region_profile(1.0, 2.0, 0.0, &[0.9], 4),
            Err(Error::SingularLowerLimit { .. })
        ));
    }

    #[test]
    fn second_derivative_matches_slope_difference() {
        let c = CatenoidProfile::new(1.0, 2.0, 0.0, 4).unwrap();
        for t in [1.2, 3.0, 10.0] {
            let h = 1e-6;
            let fd = (c.slope(t + h) - c.slope(t - h)) / (2.0 * h);
            assert!((fd - c.second_derivative(t)).abs() < 1e-6 * fd.abs());
        }
    }
}
