//! Versioned experiment configuration shared by all CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::{default_schedule, DEFAULT_LEAF_TOL};
use crate::geometry::variation::Shape1d;
use crate::geometry::VariationTestFunction;
use crate::metric::{AmbientMetric, Family};

pub const SCHEMA_VERSION: u32 = 1;

/// Check namespaces a `checks` entry may select.
pub const CHECK_NAMESPACES: [&str; 8] = ["plateau", "profile", "geometry", "asymptotics", "foliation", "perturbation", "slab", "metric"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverTolerances {
    /// Shooting tolerance on |f(r) - z|, relative to max(1, |z|).
    pub shooting: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Sup-difference between successive leaf iterates on [0, T_view].
    pub leaf: f64,
    /// Allowed |inf height - z| for leaves.
    pub inf_height: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self { shooting: 1e-9, ode_rtol: 1e-10, ode_atol: 1e-12, leaf: DEFAULT_LEAF_TOL, inf_height: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedules {
    /// Boundary radii of Plateau problems.
    pub r: Vec<f64>,
    /// Boundary heights, also the leaf heights.
    pub z: Vec<f64>,
    /// Flux radii for mass extrapolation.
    pub lambda: Vec<f64>,
    /// (s, t) radius pairs for the monotonicity identity.
    pub s_t: Vec<[f64; 2]>,
    /// Window [0, T_view] on which leaves are compared.
    pub t_view: f64,
    /// Leaf radius schedule; defaults to doublings from max(50, 2·T_view).
    pub leaf_radii: Option<Vec<f64>>,
}

impl Default for Schedules {
    fn default() -> Self {
        Self {
            r: vec![100.0],
            z: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            lambda: (0..7).map(|k| 8.0 * 2f64.powi(k)).collect(),
            s_t: vec![[1.0, 10.0], [2.0, 20.0]],
            t_view: 25.0,
            leaf_radii: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSettings {
    pub t: f64,
    /// Scale of the bump field; None picks half the admissible bound.
    pub delta: Option<f64>,
}

impl Default for PerturbationSettings {
    fn default() -> Self {
        Self { t: 0.5, delta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub dimension: usize,
    pub metric: Family,
    #[serde(default)]
    pub tolerances: SolverTolerances,
    #[serde(default)]
    pub schedules: Schedules,
    /// Check id prefixes to keep; empty keeps all.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Test functions for the stability subcommand, in the leaf's t variable.
    #[serde(default = "default_stability")]
    pub stability: Vec<VariationTestFunction>,
    #[serde(default)]
    pub perturbation: PerturbationSettings,
}

fn default_stability() -> Vec<VariationTestFunction> {
    vec![
        VariationTestFunction::new(Shape1d::Bump { lo: 2.0, hi: 8.0, amplitude: 1.0 }),
        VariationTestFunction::new(Shape1d::Constant { value: 1.0 }),
    ]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dimension: 4,
            metric: Family::Schwarzschild { mass: 2.0, horizon: true },
            tolerances: SolverTolerances::default(),
            schedules: Schedules::default(),
            checks: Vec::new(),
            output_dir: None,
            seed: 0,
            stability: default_stability(),
            perturbation: PerturbationSettings::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} = {v} must be positive and finite")))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn metric(&self) -> AmbientMetric {
        AmbientMetric { dim: self.dimension, family: self.metric.clone() }
    }

    pub fn leaf_schedule(&self) -> Vec<f64> {
        self.schedules.leaf_radii.clone().unwrap_or_else(|| default_schedule(self.schedules.t_view))
    }

    pub fn shooting_tolerance(&self, z: f64) -> f64 {
        self.tolerances.shooting * z.abs().max(1.0)
    }

    /// Whether a report id passes the `checks` filter.
    pub fn selects(&self, id: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| id.starts_with(c.as_str()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.metric().validate()?;
        let t = &self.tolerances;
        positive("tolerances.shooting", t.shooting)?;
        positive("tolerances.ode_rtol", t.ode_rtol)?;
        positive("tolerances.ode_atol", t.ode_atol)?;
        positive("tolerances.leaf", t.leaf)?;
        positive("tolerances.inf_height", t.inf_height)?;
        let s = &self.schedules;
        if s.r.is_empty() || s.z.is_empty() {
            return Err(Error::InvalidConfig("schedules.r and schedules.z must be non-empty".into()));
        }
        if let Some(r) = s.r.iter().find(|&&r| !(r > 2.0 && r.is_finite())) {
            return Err(Error::InvalidConfig(format!("boundary radius {r} must exceed 2")));
        }
        if let Some(z) = s.z.iter().find(|z| !z.is_finite()) {
            return Err(Error::InvalidConfig(format!("boundary height {z} is not finite")));
        }
        if s.lambda.len() < 3 || s.lambda[0] <= 0.0 || s.lambda.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("schedules.lambda needs at least 3 increasing positive radii".into()));
        }
        if let Some(p) = s.s_t.iter().find(|p| !(p[0] > 0.0 && p[0] < p[1] && p[1].is_finite())) {
            return Err(Error::InvalidConfig(format!("schedules.s_t pair {p:?} needs 0 < s < t")));
        }
        positive("schedules.t_view", s.t_view)?;
        if let Some(radii) = &s.leaf_radii {
            if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig("schedules.leaf_radii must increase".into()));
            }
        }
        for c in &self.checks {
            let ns = c.split('.').next().unwrap_or("");
            if !CHECK_NAMESPACES.contains(&ns) {
                return Err(Error::InvalidConfig(format!("unknown check selector {c:?}")));
            }
        }
        let p = &self.perturbation;
        if !(p.t > 0.0 && p.t < 1.0) {
            return Err(Error::InvalidConfig(format!("perturbation.t = {} must lie in (0, 1)", p.t)));
        }
        if let Some(d) = p.delta {
            positive("perturbation.delta", d)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"schema_version": 1, "dimension": 5, "metric": {"family": "schwarzschild", "mass": 2.0}}"#).unwrap();
        c.validate().unwrap();
        assert!(c.metric().is_unit_horizon_schwarzschild());
        assert_eq!(c.schedules.t_view, 25.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ExperimentConfig::default();
        c.tolerances.leaf = -1e-6;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = ExperimentConfig::default();
        c.schema_version = 2;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.checks = vec!["nonsense".into()];
        assert!(c.validate().is_err());
        let bad = r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "kerr"}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
    }
}
