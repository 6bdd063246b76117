//! Radial minimal-graph ODE for hypersurfaces of revolution x_n = f(|x'|).
//!
//! The state is (f, Q) with Q = t^{n-2}·p/(1+p²)^{1/2}, p = f'. Vanishing mean
//! curvature in g = ω·ḡ reads
//!   Q' = (n-1)·t^{n-2}·∂_ν̄u,   u = ½ ln ω,   ν̄ = (-p·e_t + e_n)/(1+p²)^{1/2},
//! which for Schwarzschild with m = 2 is the closed expression in
//! [`rhs_schwarzschild`]. Regularity on the axis forces p(0) = 0 and
//! f''(0) = ∂_n u(0, f(0)).

pub mod closed_form;
pub mod dopri;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Heading, Result};
use crate::metric::AmbientMetric;
pub use closed_form::{flat_region_profile, tail_integral, tail_integral_gl, CatenoidProfile};
use dopri::{step_factor, try_step, DenseSegment, State, Tolerances};

/// Trajectories with |p| above this are treated as having lost the graph property.
pub const SLOPE_CAP: f64 = 1e6;
/// Relative width of the horizon guard band.
pub const HORIZON_GUARD: f64 = 1e-8;
/// Radius where the axis series hands over to the integrator.
pub const AXIS_START: f64 = 1e-6;
const MAX_STEPS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub t: f64,
    pub f: f64,
    pub p: f64,
}

impl ProfileState {
    pub fn rho(&self) -> f64 {
        self.t.hypot(self.f)
    }
}

/// Paper form of Q' for Schwarzschild with m = 2.
pub fn rhs_schwarzschild(t: f64, f: f64, p: f64, n: usize) -> Result<f64> {
    let rho2 = t * t + f * f;
    if rho2 < 1.0 - 1e-12 {
        return Err(Error::DomainViolation(format!("t = {t}, f = {f} inside the horizon")));
    }
    let nf = n as f64;
    let w = (1.0 + p * p).sqrt();
    let pre = 2.0 * (nf - 1.0) / (1.0 + rho2.powf(-(nf - 2.0) / 2.0));
    Ok(-pre * t.powf(nf - 2.0) / rho2.powf(nf / 2.0) * ((f - p * t) / w))
}

/// Q' for any factor invariant under rotations fixing e_n.
pub fn rhs_general(t: f64, f: f64, p: f64, metric: &AmbientMetric) -> Result<f64> {
    let n = metric.dim;
    let x = metric.meridian_point(t, f);
    metric
        .check_domain(&x)
        .map_err(|_| Error::DomainViolation(format!("t = {t}, f = {f} outside the metric domain")))?;
    if metric.is_flat() {
        return Ok(0.0);
    }
    let w = metric.omega_jet1(&x);
    let (du_t, du_n) = (w.g[0] / (2.0 * w.v), w.g[n - 1] / (2.0 * w.v));
    let dnu = (-p * du_t + du_n) / (1.0 + p * p).sqrt();
    Ok((n as f64 - 1.0) * t.powi(n as i32 - 2) * dnu)
}

/// The ODE bound to a metric.
#[derive(Clone, Debug)]
pub struct ProfileOde {
    pub metric: AmbientMetric,
    closed_form: bool,
}

impl ProfileOde {
    pub fn new(metric: AmbientMetric) -> Self {
        let closed_form = metric.is_unit_horizon_schwarzschild() && metric.dim >= 3;
        Self { metric, closed_form }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim
    }

    pub fn rhs(&self, t: f64, f: f64, p: f64) -> Result<f64> {
        if self.closed_form {
            rhs_schwarzschild(t, f, p, self.metric.dim)
        } else {
            rhs_general(t, f, p, &self.metric)
        }
    }

    /// f''(0) = ∂_n u at (0, f0).
    pub fn axis_curvature(&self, f0: f64) -> Result<f64> {
        let n = self.metric.dim;
        if self.metric.is_flat() {
            return Ok(0.0);
        }
        let x = self.metric.meridian_point(0.0, f0);
        self.metric
            .check_domain(&x)
            .map_err(|_| Error::DomainViolation(format!("axis height {f0} outside the metric domain")))?;
        if self.closed_form {
            let nf = n as f64;
            return Ok(-2.0 * f0.powf(1.0 - nf) / (1.0 + f0.powf(2.0 - nf)));
        }
        let w = self.metric.omega_jet1(&x);
        Ok(w.g[n - 1] / (2.0 * w.v))
    }

    fn slope(&self, t: f64, q: f64) -> Result<f64> {
        let s = q / t.powi(self.metric.dim as i32 - 2);
        if !(s.abs() < 1.0) {
            let heading = if q < 0.0 { Heading::Down } else { Heading::Up };
            return Err(Error::SlopeBlowup { t, heading });
        }
        Ok(s / (1.0 - s * s).sqrt())
    }

    fn q_of(&self, t: f64, p: f64) -> f64 {
        t.powi(self.metric.dim as i32 - 2) * p / (1.0 + p * p).sqrt()
    }

    fn derivative(&self, t: f64, y: &State) -> Result<State> {
        let p = self.slope(t, y[1])?;
        Ok([p, self.rhs(t, y[0], p)?])
    }

    /// f'' recovered from Q' = (n-2)t^{n-3}p/W + t^{n-2}f''/W³.
    pub fn second_derivative(&self, t: f64, f: f64, p: f64) -> Result<f64> {
        let n = self.metric.dim as i32;
        let w = (1.0 + p * p).sqrt();
        let dq = self.rhs(t, f, p)?;
        Ok((dq - (n - 2) as f64 * t.powi(n - 3) * p / w) * w * w * w / t.powi(n - 2))
    }
}

/// Second-order series start off the axis.
pub fn axis_start(f0: f64, t_start: f64, ode: &ProfileOde) -> Result<ProfileState> {
    let c = ode.axis_curvature(f0)?;
    Ok(ProfileState { t: t_start, f: f0 + 0.5 * c * t_start * t_start, p: c * t_start })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest accepted scaled local error estimate.
    pub max_error_ratio: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    pub tol: Tolerances,
    pub slope_cap: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), slope_cap: SLOPE_CAP }
    }
}

/// A solved radial graph with dense output.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub metric: AmbientMetric,
    /// Outer end of the integration (the boundary radius for Plateau solutions).
    pub r: f64,
    /// Target boundary height; equals f(r) for free integrations.
    pub z: f64,
    /// f(0), or the starting height for off-axis starts.
    pub f0: f64,
    pub axis_curvature: f64,
    pub t_start: f64,
    pub samples: Vec<ProfileState>,
    pub stats: IntegratorStats,
    /// Radii where the height changed sign.
    pub sign_changes: Vec<f64>,
    from_axis: bool,
    segments: Vec<DenseSegment>,
    ode: ProfileOde,
}

impl RadialProfile {
    pub fn dim(&self) -> usize {
        self.metric.dim
    }

    pub fn t_min(&self) -> f64 {
        if self.from_axis {
            0.0
        } else {
            self.t_start
        }
    }

    pub fn end(&self) -> ProfileState {
        *self.samples.last().unwrap()
    }

    /// State at t ∈ [t_min, r] from the series (below t_start) or dense output.
    pub fn eval(&self, t: f64) -> ProfileState {
        if t < self.t_start || self.segments.is_empty() {
            let c = self.axis_curvature;
            return ProfileState { t, f: self.f0 + 0.5 * c * t * t, p: c * t };
        }
        let i = self.segments.partition_point(|s| s.t1() < t).min(self.segments.len() - 1);
        let y = self.segments[i].eval(t);
        let p = self.ode.slope(t, y[1]).unwrap_or(f64::NAN);
        ProfileState { t, f: y[0], p }
    }

    pub fn height(&self, t: f64) -> f64 {
        self.eval(t).f
    }

    /// f'' from the ODE at t.
    pub fn second_derivative(&self, t: f64) -> f64 {
        if t < self.t_start {
            return self.axis_curvature;
        }
        let s = self.eval(t);
        self.ode.second_derivative(t, s.f, s.p).unwrap_or(f64::NAN)
    }

    /// Boundary residual f(r) - z.
    pub fn residual(&self) -> f64 {
        self.end().f - self.z
    }

    /// Copy with the graph heights replaced, for negative controls.
    pub fn with_samples(&self, samples: Vec<ProfileState>) -> Self {
        let mut out = self.clone();
        out.samples = samples;
        out
    }

    pub fn ode(&self) -> &ProfileOde {
        &self.ode
    }
}

/// Integrate from the axis with f(0) = f0 to t_end.
pub fn integrate(ode: &ProfileOde, f0: f64, t_end: f64, opts: &IntegrateOptions) -> Result<RadialProfile> {
    let t_start = AXIS_START;
    integrate_from_axis(ode, f0, t_start, t_end, opts)
}

pub fn integrate_from_axis(
    ode: &ProfileOde,
    f0: f64,
    t_start: f64,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<RadialProfile> {
    let start = axis_start(f0, t_start, ode)?;
    let mut prof = integrate_from(ode, start, t_end, opts)?;
    prof.from_axis = true;
    prof.f0 = f0;
    prof.axis_curvature = ode.axis_curvature(f0)?;
    Ok(prof)
}

/// Integrate from an arbitrary state off the axis.
pub fn integrate_from(ode: &ProfileOde, start: ProfileState, t_end: f64, opts: &IntegrateOptions) -> Result<RadialProfile> {
    if !(t_end > start.t) || !(start.t > 0.0) {
        return Err(Error::InvalidConfig(format!("integration range [{}, {t_end}] invalid", start.t)));
    }
    if !(opts.tol.rtol > 0.0 && opts.tol.atol > 0.0) {
        return Err(Error::InvalidConfig("tolerances must be positive".into()));
    }
    let horizon = ode.metric.horizon_radius();
    let mut stats = IntegratorStats::default();
    let mut t = start.t;
    let mut y: State = [start.f, ode.q_of(start.t, start.p)];
    let mut count = 0usize;
    let mut rhs = |tt: f64, yy: &State| -> Result<State> {
        count += 1;
        ode.derivative(tt, yy)
    };
    let mut k1 = rhs(t, &y)?;
    let mut samples = vec![start];
    let mut segments = Vec::new();
    let mut sign_changes = Vec::new();
    let span = t_end - t;
    let mut h = (1e-3 * span).min(0.1 * t.max(1e-300) + 1e-3 * span);
    let guard_check = |s: &ProfileState| -> Result<()> {
        if let Some(rh) = horizon {
            if s.rho() < rh * (1.0 + HORIZON_GUARD) {
                return Err(Error::HorizonCollision { t: s.t });
            }
        }
        if !(s.p.abs() <= opts.slope_cap) {
            let heading = if s.p < 0.0 { Heading::Down } else { Heading::Up };
            return Err(Error::SlopeBlowup { t: s.t, heading });
        }
        Ok(())
    };
    guard_check(&start)?;
    let mut pending: Option<Error> = None;
    while t < t_end {
        if stats.steps + stats.rejected > MAX_STEPS {
            return Err(Error::StepUnderflow { t });
        }
        let last = t_end - t <= h * (1.0 + 1e-12);
        let hh = if last { t_end - t } else { h };
        if hh < 1e-14 * t.abs().max(1.0) {
            return Err(pending.unwrap_or(Error::StepUnderflow { t }));
        }
        match try_step(&mut rhs, t, &y, &k1, hh, &opts.tol) {
            Err(e) => {
                // a stage left the admissible region: shrink and retry
                pending = Some(e);
                stats.rejected += 1;
                h = 0.25 * hh;
            }
            Ok(out) if out.err > 1.0 || !out.err.is_finite() => {
                stats.rejected += 1;
                h = hh * step_factor(out.err).min(1.0);
            }
            Ok(out) => {
                pending = None;
                let tn = if last { t_end } else { t + hh };
                let p = ode.slope(tn, out.y[1])?;
                let s = ProfileState { t: tn, f: out.y[0], p };
                guard_check(&s)?;
                if y[0].signum() != out.y[0].signum() && y[0] != 0.0 && out.y[0] != 0.0 {
                    sign_changes.push(tn);
                }
                stats.steps += 1;
                stats.max_error_ratio = stats.max_error_ratio.max(out.err);
                t = tn;
                y = out.y;
                k1 = out.k_end;
                samples.push(s);
                segments.push(out.segment);
                h = hh * step_factor(out.err);
            }
        }
    }
    stats.evaluations = count;
    let end = *samples.last().unwrap();
    Ok(RadialProfile {
        metric: ode.metric.clone(),
        r: t_end,
        z: end.f,
        f0: start.f,
        axis_curvature: 0.0,
        t_start: start.t,
        samples,
        stats,
        sign_changes,
        from_axis: false,
        segments,
        ode: ode.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schwarzschild_rhs_spot_value() {
        let v = rhs_schwarzschild(1.0, 1.0, 0.0, 4).unwrap();
        assert!((v + 1.0).abs() < 1e-15);
        assert_eq!(rhs_schwarzschild(3.0, 0.0, 0.0, 5).unwrap(), 0.0);
        assert!(rhs_schwarzschild(2.0, 0.5, -0.3, 4).unwrap() < 0.0);
        assert!(matches!(rhs_schwarzschild(0.5, 0.5, 0.0, 4), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn general_rhs_reproduces_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 4..=7 {
            let m = AmbientMetric::schwarzschild(n, 2.0);
            for _ in 0..2000 {
                let t = rng.gen_range(0.01..50.0);
                let f = rng.gen_range(-20.0..20.0);
                if t * t + f * f < 1.0 {
                    continue;
                }
                let p = rng.gen_range(-5.0..5.0);
                let a = rhs_schwarzschild(t, f, p, n).unwrap();
                let b = rhs_general(t, f, p, &m).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{n} {t} {f} {p}: {a} {b}");
            }
        }
    }

    #[test]
    fn slab_lower_half_is_flat() {
        let m = AmbientMetric::default_slab(4);
        assert_eq!(rhs_general(3.0, -1.0, -0.4, &m).unwrap(), 0.0);
    }

    #[test]
    fn axis_curvature_sign_and_flat_case() {
        let ode = ProfileOde::new(AmbientMetric::schwarzschild(4, 2.0));
        assert!(ode.axis_curvature(1.5).unwrap() < 0.0);
        let flat = ProfileOde::new(AmbientMetric::flat(4));
        let s = axis_start(2.0, 1e-6, &flat).unwrap();
        assert_eq!((s.f, s.p), (2.0, 0.0));
        // general path agrees with the closed form
        let general = ProfileOde::new(AmbientMetric::schwarzschild(5, 2.0));
        let mut g = general.clone();
        g.closed_form = false;
        let (a, b) = (general.axis_curvature(1.3).unwrap(), g.axis_curvature(1.3).unwrap());
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn flat_start_stays_flat() {
        let ode = ProfileOde::new(AmbientMetric::flat(4));
        let prof = integrate(&ode, 3.0, 40.0, &IntegrateOptions::default()).unwrap();
        assert!(prof.samples.iter().all(|s| (s.f - 3.0).abs() < 1e-12));
    }

    #[test]
    fn schwarzschild_profile_descends() {
        let ode = ProfileOde::new(AmbientMetric::schwarzschild(4, 2.0));
        let prof = integrate(&ode, 2.0, 50.0, &IntegrateOptions::default()).unwrap();
        assert!(prof.samples.iter().all(|s| s.p <= 0.0));
        assert!(prof.end().f < 2.0);
        // f0 = 1 starts on the horizon, whose hemisphere solves the ODE
        let r = integrate(&ode, 1.0, 50.0, &IntegrateOptions::default());
        assert!(matches!(r, Err(Error::HorizonCollision { .. })));
    }

    #[test]
    fn start_offset_refinement() {
        let ode = ProfileOde::new(AmbientMetric::schwarzschild(4, 2.0));
        let opts = IntegrateOptions::default();
        let a = integrate_from_axis(&ode, 1.2, 1e-4, 30.0, &opts).unwrap().end().f;
        let b = integrate_from_axis(&ode, 1.2, 5e-5, 30.0, &opts).unwrap().end().f;
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn horizon_collision_reported() {
        let ode = ProfileOde::new(AmbientMetric::schwarzschild(4, 2.0));
        let r = integrate(&ode, 1.0 + 5e-9, 50.0, &IntegrateOptions::default());
        assert!(matches!(r, Err(Error::HorizonCollision { .. })), "{:?}", r.err());
    }

    #[test]
    fn dense_second_derivative_consistent() {
        let ode = ProfileOde::new(AmbientMetric::schwarzschild(4, 2.0));
        let prof = integrate(&ode, 2.0, 30.0, &IntegrateOptions::default()).unwrap();
        for t in [0.5, 3.0, 17.0] {
            let h = 1e-4;
            let fd = (prof.eval(t + h).p - prof.eval(t - h).p) / (2.0 * h);
            let ode_value = prof.second_derivative(t);
            assert!((fd - ode_value).abs() < 1e-6 * ode_value.abs().max(1e-3), "{t}: {fd} {ode_value}");
        }
    }

    #[test]
    fn flat_catenoid_matches_closed_form() {
        let c = CatenoidProfile::new(1.0, 2.0, 0.0, 4).unwrap();
        let ode = ProfileOde::new(AmbientMetric::flat(4));
        let prof = integrate_from(&ode, c.state(2.0), 100.0, &IntegrateOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=980 {
            let t = 2.0 + 0.1 * k as f64;
            worst = worst.max((prof.height(t) - c.height(t)).abs());
        }
        assert!(worst < 1e-8, "{worst}");
    }
}
