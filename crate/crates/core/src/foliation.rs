//! Leaves Σ_z as limits r → ∞ of Plateau solutions with boundary height z,
//! and the ordering, height and decay structure of the family {Σ_z}.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{log_grid, power_fit};
use crate::metric::AmbientMetric;
use crate::plateau::{solve_plateau, ShootingProblem};
use crate::profile::{ProfileState, RadialProfile};
use crate::report::CheckReport;

/// Samples of each iterate on [0, T_view].
pub const VIEW_SAMPLES: usize = 501;
pub const DEFAULT_LEAF_TOL: f64 = 1e-6;

/// r_k = r0·2^k; 24 doublings of 50 reach ~8·10^8.
pub fn default_schedule(t_view: f64) -> Vec<f64> {
    let r0 = 50f64.max(2.0 * t_view);
    (0..24).map(|k| r0 * 2f64.powi(k)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Leaf {
    pub z: f64,
    pub dim: usize,
    pub t_view: f64,
    pub tol: f64,
    /// Radii solved so far, and f(0) for each.
    pub radii: Vec<f64>,
    pub axis_heights: Vec<f64>,
    /// sup_{t ≤ T_view}|f_{r_{k+1}} - f_{r_k}|.
    pub sup_history: Vec<f64>,
    /// max over steps and view samples of f_{r_k} - f_{r_{k+1}}; nonpositive
    /// when iterates rise with r.
    pub max_decrease_in_r: f64,
    /// Last iterate on the view grid.
    pub view: Vec<ProfileState>,
    /// min f over the whole last iterate.
    pub inf_height: f64,
    #[serde(skip)]
    pub profile: RadialProfile,
}

impl Leaf {
    pub fn converged_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// max f - min f on the view grid.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self.view.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.f), b.max(s.f)));
        hi - lo
    }
}

fn view_grid(t_view: f64) -> Vec<f64> {
    (0..VIEW_SAMPLES).map(|i| t_view * i as f64 / (VIEW_SAMPLES - 1) as f64).collect()
}

fn sample(profile: &RadialProfile, grid: &[f64]) -> Vec<ProfileState> {
    grid.iter().map(|&t| profile.eval(t)).collect()
}

/// Solves Plateau problems along `schedule` until consecutive iterates agree
/// within `tol` on [0, T_view].
pub fn build_leaf(metric: &AmbientMetric, z: f64, schedule: &[f64], t_view: f64, tol: f64) -> Result<Leaf> {
    if !(t_view > 0.0 && tol > 0.0) {
        return Err(Error::InvalidConfig(format!("need T_view > 0 and tol > 0, got {t_view}, {tol}")));
    }
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("r schedule must be increasing with at least 2 entries".into()));
    }
    if !(schedule[0] > 2.0 && schedule[0] >= 2.0 * t_view) {
        return Err(Error::InvalidConfig(format!("first radius {} must exceed 2 and be at least 2·T_view", schedule[0])));
    }
    let grid = view_grid(t_view);
    let mut radii = Vec::new();
    let mut axis_heights = Vec::new();
    let mut sup_history = Vec::new();
    let mut max_decrease = f64::NEG_INFINITY;
    let mut prev: Option<Vec<ProfileState>> = None;
    for &r in schedule {
        let profile = solve_plateau(&ShootingProblem::new(metric.clone(), r, z))?;
        let view = sample(&profile, &grid);
        radii.push(r);
        axis_heights.push(profile.f0);
        if let Some(p) = &prev {
            let mut sup = 0.0f64;
            for (a, b) in p.iter().zip(&view) {
                sup = sup.max((b.f - a.f).abs());
                max_decrease = max_decrease.max(a.f - b.f);
            }
            sup_history.push(sup);
            if sup < tol {
                let inf_height = profile.samples.iter().map(|s| s.f).fold(f64::INFINITY, f64::min);
                return Ok(Leaf {
                    z,
                    dim: metric.dim,
                    t_view,
                    tol,
                    radii,
                    axis_heights,
                    sup_history,
                    max_decrease_in_r: max_decrease,
                    view,
                    inf_height,
                    profile,
                });
            }
        }
        prev = Some(view);
    }
    Err(Error::NotConverged { last_diff: sup_history.last().copied().unwrap_or(f64::INFINITY), tol })
}

/// Per-leaf checks: sup-difference history decreasing, final difference below
/// tolerance, f ≥ z - tol and nonincreasing on the view, iterates
/// nondecreasing in r up to solver accuracy.
pub fn leaf_report(leaf: &Leaf) -> CheckReport {
    let growth = leaf.sup_history.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let below = leaf.view.iter().map(|s| leaf.z - s.f).fold(f64::NEG_INFINITY, f64::max);
    let rise = leaf.view.windows(2).map(|w| w[1].f - w[0].f).fold(f64::NEG_INFINITY, f64::max);
    let solver = 1e-8 * leaf.z.abs().max(1.0);
    let last = *leaf.sup_history.last().unwrap_or(&f64::INFINITY);
    // each term is ≤ 0 when its property holds
    let terms = [
        last - leaf.tol,
        growth - solver,
        below - leaf.tol,
        rise - solver,
        leaf.max_decrease_in_r - solver,
    ];
    let value = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    CheckReport::new("foliation.leaf", "Plateau solutions converge locally smoothly to a leaf approaching z from above", value, 0.0)
        .metric("z", leaf.z)
        .metric("radius", leaf.converged_radius())
        .metric("last_sup_diff", last)
        .metric("max_below_z", below)
        .metric("max_rise", rise)
        .metric("max_decrease_in_r", leaf.max_decrease_in_r)
}

/// Strict ordering of leaves sorted by z at every shared view sample; the
/// value is minus the smallest gap.
pub fn leaf_ordering(leaves: &[Leaf]) -> CheckReport {
    let mut min_gap = f64::INFINITY;
    let mut shared = true;
    for w in leaves.windows(2) {
        if w[0].view.len() != w[1].view.len() || w[0].t_view != w[1].t_view {
            shared = false;
            continue;
        }
        for (a, b) in w[0].view.iter().zip(&w[1].view) {
            min_gap = min_gap.min(b.f - a.f);
        }
    }
    let mut rep = CheckReport::new("foliation.ordering", "leaves for distinct z are disjoint and ordered by z", -min_gap, -f64::MIN_POSITIVE)
        .metric("min_gap", min_gap);
    if !shared {
        rep = rep.note("leaves do not share a view grid");
        rep.value = f64::INFINITY;
        rep.refresh();
    }
    rep
}

/// |inf height - z| over leaves.
pub fn inf_height_report(leaves: &[Leaf], tol: f64) -> CheckReport {
    let dev = leaves.iter().map(|l| (l.inf_height - l.z).abs()).fold(0.0, f64::max);
    CheckReport::new("foliation.inf_height", "inf of the height over a leaf equals z", dev, tol)
}

/// Oscillation of f over the view strictly decreasing in z.
pub fn oscillation_report(leaves: &[Leaf]) -> CheckReport {
    let osc: Vec<f64> = leaves.iter().map(Leaf::oscillation).collect();
    let worst = osc.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut rep = CheckReport::new("foliation.oscillation", "leaves flatten as z grows", worst, -f64::MIN_POSITIVE);
    for (l, o) in leaves.iter().zip(&osc) {
        rep = rep.metric(format!("osc_z{}", l.z), *o);
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationScan {
    pub leaves: Vec<Leaf>,
    pub reports: Vec<CheckReport>,
}

/// Leaves for each z in parallel, then per-leaf, ordering, inf-height and
/// oscillation reports.
pub fn foliation_scan(metric: &AmbientMetric, z_grid: &[f64], schedule: &[f64], t_view: f64, tol: f64) -> Result<FoliationScan> {
    if z_grid.is_empty() || z_grid[0] <= 0.0 || z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("z grid must be positive and strictly increasing".into()));
    }
    let leaves = z_grid.par_iter().map(|&z| build_leaf(metric, z, schedule, t_view, tol)).collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<CheckReport> = leaves.iter().map(leaf_report).collect();
    reports.push(leaf_ordering(&leaves));
    reports.push(inf_height_report(&leaves, 10.0 * tol));
    reports.push(oscillation_report(&leaves));
    Ok(FoliationScan { leaves, reports })
}

/// Leaves for a decreasing z sequence: inf heights equal z and the leaves
/// descend with z. A horizon collision ends the sequence and is recorded.
pub fn sigma0_limit(metric: &AmbientMetric, z_seq: &[f64], schedule: &[f64], t_view: f64, tol: f64, inf_tol: f64) -> Result<CheckReport> {
    if z_seq.is_empty() || z_seq.iter().any(|z| *z <= 0.0) || z_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("z sequence must be positive and strictly decreasing".into()));
    }
    let mut leaves = Vec::new();
    let mut note = String::new();
    for &z in z_seq {
        match build_leaf(metric, z, schedule, t_view, tol) {
            Ok(l) => leaves.push(l),
            Err(Error::HorizonCollision { t }) => {
                note = format!("leaf at z = {z} meets the horizon near t = {t:.4}");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    leaves.reverse();
    let inf = inf_height_report(&leaves, inf_tol);
    let order = leaf_ordering(&leaves);
    let value = (inf.value - inf_tol).max(order.value - order.tolerance);
    let mut rep = CheckReport::new("foliation.sigma0_limit", "leaves descend to a limit leaf with inf height 0", value, 0.0)
        .metric("leaves", leaves.len() as f64)
        .metric("max_inf_deviation", inf.value)
        .metric("min_gap", order.metrics["min_gap"]);
    if let Some(l) = leaves.first() {
        rep = rep.metric("smallest_z", l.z).metric("smallest_axis_height", l.profile.f0);
    }
    if !note.is_empty() {
        rep = rep.note(note);
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub f_tail: f64,
}

/// Power law of |f - f_tail| on [T/2, T], T = T_view, with f_tail from
/// Aitken extrapolation of f(T/4), f(T/2), f(T).
pub fn decay_fit(leaf: &Leaf) -> Result<DecayFit> {
    decay_fit_window(&leaf.profile, leaf.t_view)
}

pub fn decay_fit_window(profile: &RadialProfile, t_end: f64) -> Result<DecayFit> {
    if t_end > profile.r {
        return Err(Error::InsufficientRange(format!("tail end {t_end} beyond the profile radius {}", profile.r)));
    }
    let (f1, f2, f3) = (profile.height(0.25 * t_end), profile.height(0.5 * t_end), profile.height(t_end));
    let den = f1 + f3 - 2.0 * f2;
    let f_tail = if den.abs() > 1e-300 && (f2 - f1) * (f3 - f2) > 0.0 { f3 - (f3 - f2).powi(2) / den } else { f3 };
    let ts = log_grid(0.5 * t_end, t_end, 16);
    let ys: Vec<f64> = ts.iter().map(|&t| profile.height(t) - f_tail).collect();
    let max = ys.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    if max < 1e-12 {
        return Err(Error::TailTooFlat(max));
    }
    let fit = power_fit(&ts, &ys).ok_or(Error::TailTooFlat(max))?;
    Ok(DecayFit { exponent: fit.exponent, amplitude: fit.amplitude, residual: fit.residual, f_tail })
}

/// Fitted exponent within ±0.3 of 3 - n.
pub fn decay_report(leaf: &Leaf) -> CheckReport {
    let anchor = "leaf heights approach their limit at rate |y|^(3-n)";
    let target = 3.0 - leaf.dim as f64;
    match decay_fit(leaf) {
        Ok(fit) => CheckReport::new("foliation.decay", anchor, (fit.exponent - target).abs(), 0.3)
            .metric("exponent", fit.exponent)
            .metric("target", target)
            .metric("f_tail", fit.f_tail)
            .metric("fit_residual", fit.residual),
        Err(Error::TailTooFlat(m)) => CheckReport::new("foliation.decay", anchor, 0.0, 0.3).note(format!("tail too flat to fit ({m:.2e})")),
        Err(e) => CheckReport::failed("foliation.decay", anchor, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_leaf_is_the_plane() {
        let flat = AmbientMetric::flat(4);
        let leaf = build_leaf(&flat, 1.5, &default_schedule(25.0), 25.0, 1e-6).unwrap();
        assert_eq!(leaf.radii.len(), 2);
        assert!(leaf.view.iter().all(|s| s.f == 1.5));
        assert!(matches!(decay_fit(&leaf), Err(Error::TailTooFlat(_))));
        assert!(leaf_report(&leaf).passed);
    }

    #[test]
    fn flat_gaps_are_exact() {
        let flat = AmbientMetric::flat(5);
        let scan = foliation_scan(&flat, &[0.5, 1.0, 3.0], &default_schedule(10.0), 10.0, 1e-6).unwrap();
        let ord = scan.reports.iter().find(|r| r.id == "foliation.ordering").unwrap();
        assert_eq!(ord.metrics["min_gap"], 0.5);
        assert!(scan.reports.iter().filter(|r| r.id != "foliation.oscillation").all(|r| r.passed), "{:?}", scan.reports);
    }

    #[test]
    fn schwarzschild_leaf_structure() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        let scan = foliation_scan(&m, &[1.0, 2.0, 4.0], &default_schedule(25.0), 25.0, 1e-6).unwrap();
        for r in &scan.reports {
            assert!(r.passed, "{r:?}");
        }
        // negative control: push one sample of the middle leaf above its neighbor
        let mut leaves = scan.leaves.clone();
        let i = 200;
        leaves[1].view[i].f = leaves[2].view[i].f + 1e-3;
        assert!(!leaf_ordering(&leaves).passed);
    }

    #[test]
    fn bad_schedules_rejected() {
        let m = AmbientMetric::schwarzschild(4, 2.0);
        assert!(build_leaf(&m, 1.0, &[40.0, 80.0], 25.0, 1e-6).is_err());
        assert!(matches!(build_leaf(&m, 1.0, &[50.0, 100.0, 200.0], 25.0, 1e-6), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn decay_exponents() {
        for (n, t_view) in [(4, 400.0), (5, 400.0)] {
            let m = AmbientMetric::schwarzschild(n, 2.0);
            let leaf = build_leaf(&m, 1.0, &default_schedule(t_view), t_view, 1e-6).unwrap();
            let rep = decay_report(&leaf);
            assert!(rep.passed, "{rep:?}");
        }
    }
}
