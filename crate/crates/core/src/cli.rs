//! Subcommand drivers behind the `minsurf` binary.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::foliation::{foliation_scan, inf_height_report, Leaf};
use crate::geometry::asymptotics::induced_mass_check;
use crate::geometry::{acv_functional, induced_mass, second_variation, second_variation_fd, VariationTestFunction};
use crate::geometry::variation::AcvValue;
use crate::metric::{adm_mass, MassEstimate};
use crate::output::{collect_reports, emit_plotdata, write_json, write_profile_csv, z_order};
use crate::perturbation::{bump_reports, default_chain, default_delta, verify_perturbed_metric, BumpChain};
use crate::plateau::verify_solution;
use crate::report::{relative_residual, CheckReport};
use crate::suites::{bounds_suite, configured_leaf, identities_suite, paper_suite, solve_configured, CriterionOutcome, SUITES};

pub const SUBCOMMANDS: [&str; 7] = ["plateau", "foliate", "verify", "mass", "stability", "perturb", "report"];
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub suite: String,
    /// Record wall-clock runtimes in the outputs; off keeps outputs byte-stable.
    pub timings: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    command: &'a str,
    passed: bool,
    #[serde(flatten)]
    body: T,
    reports: &'a [CheckReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_s: Option<f64>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    start: Instant,
    artifacts: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.opts.out_dir.join(name);
        self.artifacts.push(p.clone());
        p
    }

    fn runtime(&self) -> Option<f64> {
        self.opts.timings.then(|| self.start.elapsed().as_secs_f64())
    }

    fn finish<T: Serialize>(self, command: &str, file: &str, body: T, reports: Vec<CheckReport>) -> Result<RunOutcome> {
        self.finish_with(command, file, body, reports, true)
    }

    /// Writes the document; `also` must hold in addition to every report passing.
    fn finish_with<T: Serialize>(mut self, command: &str, file: &str, body: T, reports: Vec<CheckReport>, also: bool) -> Result<RunOutcome> {
        let reports: Vec<CheckReport> = reports.into_iter().filter(|r| self.cfg.selects(&r.id)).collect();
        let passed = also && reports.iter().all(|r| r.passed);
        let runtime_s = self.runtime();
        let path = self.path(file);
        write_json(&path, &Document { command, passed, body, reports: &reports, runtime_s })?;
        Ok(RunOutcome { passed, artifacts: self.artifacts })
    }
}

/// Runs one subcommand; the configuration must already be validated.
pub fn run_subcommand(name: &str, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    if !SUBCOMMANDS.contains(&name) {
        return Err(Error::InvalidConfig(format!("unknown subcommand {name:?}")));
    }
    if name == "verify" && !SUITES.contains(&opts.suite.as_str()) {
        return Err(Error::InvalidConfig(format!("unknown suite {:?}; expected one of {SUITES:?}", opts.suite)));
    }
    std::fs::create_dir_all(&opts.out_dir)?;
    let ctx = Ctx { cfg, opts, start: Instant::now(), artifacts: Vec::new() };
    match name {
        "plateau" => plateau(ctx),
        "foliate" => foliate(ctx),
        "verify" => verify(ctx),
        "mass" => mass(ctx),
        "stability" => stability(ctx),
        "perturb" => perturb(ctx),
        _ => report(ctx),
    }
}

#[derive(Serialize)]
struct PlateauBody {
    r: f64,
    z: f64,
    axis_height: f64,
    boundary_residual: f64,
}

fn plateau(mut ctx: Ctx) -> Result<RunOutcome> {
    let (r, z) = (ctx.cfg.schedules.r[0], ctx.cfg.schedules.z[0]);
    let prof = solve_configured(ctx.cfg, r, z)?;
    let csv = ctx.path("plateau_profile.csv");
    write_profile_csv(&csv, &prof.samples)?;
    let body = PlateauBody { r, z, axis_height: prof.f0, boundary_residual: prof.residual() };
    ctx.finish("plateau", "plateau.json", body, verify_solution(&prof))
}

#[derive(Serialize)]
struct LeafSummary {
    z: f64,
    csv: String,
    converged_radius: f64,
    axis_height: f64,
    inf_height: f64,
    oscillation: f64,
    sup_history: Vec<f64>,
}

#[derive(Serialize)]
struct FoliationBody {
    t_view: f64,
    leaves: Vec<LeafSummary>,
}

fn sorted_heights(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let mut zs = cfg.schedules.z.clone();
    zs.sort_by(f64::total_cmp);
    if zs[0] <= 0.0 || zs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("leaf heights must be positive and distinct".into()));
    }
    Ok(zs)
}

fn foliate(mut ctx: Ctx) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let metric = cfg.metric();
    let zs = sorted_heights(cfg)?;
    let scan = foliation_scan(&metric, &zs, &cfg.leaf_schedule(), cfg.schedules.t_view, cfg.tolerances.leaf)?;
    let mut leaves = Vec::new();
    for (k, i) in z_order(&scan.leaves).into_iter().enumerate() {
        let leaf: &Leaf = &scan.leaves[i];
        let name = format!("leaf_{k:02}.csv");
        let path = ctx.path(&name);
        write_profile_csv(&path, &leaf.view)?;
        leaves.push(LeafSummary {
            z: leaf.z,
            csv: name,
            converged_radius: leaf.converged_radius(),
            axis_height: leaf.profile.f0,
            inf_height: leaf.inf_height,
            oscillation: leaf.oscillation(),
            sup_history: leaf.sup_history.clone(),
        });
    }
    ctx.artifacts.extend(emit_plotdata(&ctx.opts.out_dir, &scan.leaves, metric.horizon_radius())?);
    let reports: Vec<CheckReport> = scan
        .reports
        .into_iter()
        .map(|r| if r.id == "foliation.inf_height" { inf_height_report(&scan.leaves, cfg.tolerances.inf_height) } else { r })
        .collect();
    ctx.finish("foliate", "foliation.json", FoliationBody { t_view: cfg.schedules.t_view, leaves }, reports)
}

#[derive(Serialize)]
struct SuiteBody<'a> {
    suite: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    criteria: Vec<CriterionOutcome>,
}

fn verify(ctx: Ctx) -> Result<RunOutcome> {
    let suite = ctx.opts.suite.clone();
    let seed = ctx.cfg.seed;
    let file = format!("verify_{}.json", suite.replace('-', "_"));
    match suite.as_str() {
        "paper-suite" => {
            let criteria = paper_suite(seed, ctx.opts.timings);
            let mut reports = Vec::new();
            for c in &criteria {
                if let Some(e) = &c.error {
                    reports.push(CheckReport::failed(format!("criterion.{:02}", c.number), c.statement.clone(), e.clone()));
                }
            }
            let all = criteria.iter().all(|c| c.passed);
            ctx.finish_with("verify", &file, SuiteBody { suite: &suite, seed, criteria }, reports, all)
        }
        "identities" => {
            let reports = identities_suite(ctx.cfg)?;
            ctx.finish("verify", &file, SuiteBody { suite: &suite, seed, criteria: vec![] }, reports)
        }
        _ => {
            let reports = bounds_suite(ctx.cfg)?;
            ctx.finish("verify", &file, SuiteBody { suite: &suite, seed, criteria: vec![] }, reports)
        }
    }
}

#[derive(Serialize)]
struct InducedRow {
    z: f64,
    estimate: MassEstimate,
}

#[derive(Serialize)]
struct MassBody {
    adm: MassEstimate,
    induced: Vec<InducedRow>,
}

fn mass(ctx: Ctx) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let metric = cfg.metric();
    let adm = adm_mass(&metric, &cfg.schedules.lambda)?;
    let mut induced = Vec::new();
    let mut reports = Vec::new();
    if metric.dim >= 4 {
        for z in sorted_heights(cfg)? {
            let leaf = configured_leaf(cfg, z)?;
            // fluxes at λ ≲ z still see the leaf bending toward its height
            let lo = 8.0 * z.abs().max(1.0);
            let radii: Vec<f64> = cfg.schedules.lambda.iter().copied().filter(|&l| l >= lo && l <= leaf.profile.r).collect();
            induced.push(InducedRow { z, estimate: induced_mass(&leaf.profile, &metric, &radii)? });
            reports.push(induced_mass_check(&leaf.profile, &metric, &radii)?.metric("z", z));
        }
    }
    ctx.finish("mass", "mass.json", MassBody { adm, induced }, reports)
}

#[derive(Serialize)]
struct StabilityRow {
    test_function: VariationTestFunction,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_variation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acv: Option<AcvValue>,
}

#[derive(Serialize)]
struct StabilityBody {
    z: f64,
    resolved_radius: f64,
    rows: Vec<StabilityRow>,
}

/// Compactly supported test functions get the second variation and its
/// finite-difference oracle; the others get the quadratic form Q(1 + u).
fn stability(ctx: Ctx) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let metric = cfg.metric();
    let z = cfg.schedules.z[0];
    let leaf = configured_leaf(cfg, z)?;
    let prof = &leaf.profile;
    let b = (0.5 * prof.r).min(1e4);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for tf in &cfg.stability {
        if tf.compactly_supported() {
            let q = second_variation(prof, &metric, tf, 0.0, prof.r)?;
            let fd = second_variation_fd(prof, &metric, tf, 0.0, prof.r, 1e-3)?;
            reports.push(
                CheckReport::new("geometry.second_variation_fd", "second variation formula against finite differences of area", relative_residual(q, fd, 1e-300), 1e-4)
                    .metric("formula", q)
                    .metric("finite_difference", fd),
            );
            rows.push(StabilityRow { test_function: tf.clone(), second_variation: Some(q), finite_difference: Some(fd), acv: None });
        } else {
            let acv = acv_functional(prof, &metric, &tf.u, b)?;
            rows.push(StabilityRow { test_function: tf.clone(), second_variation: None, finite_difference: None, acv: Some(acv) });
        }
    }
    ctx.finish("stability", "stability.json", StabilityBody { z, resolved_radius: b, rows }, reports)
}

#[derive(Serialize)]
struct PerturbBody {
    chain: BumpChain,
    t: f64,
    delta: f64,
}

fn perturb(ctx: Ctx) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let metric = cfg.metric();
    let chain = default_chain(&metric)?;
    let delta = cfg.perturbation.delta.unwrap_or_else(|| default_delta(&chain));
    let t = cfg.perturbation.t;
    let mut reports = Vec::new();
    for (i, b) in chain.bumps.iter().enumerate() {
        reports.extend(bump_reports(&metric, b, &format!("perturbation.bump{}", i + 1)));
    }
    reports.extend(verify_perturbed_metric(&metric, &chain, t, delta)?);
    ctx.finish("perturb", "perturb.json", PerturbBody { chain, t, delta }, reports)
}

#[derive(Serialize)]
struct FileSummary {
    file: String,
    checks: usize,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct ReportBody {
    checks: usize,
    files: Vec<FileSummary>,
}

/// Aggregates every CheckReport in the JSON files of the output directory.
fn report(ctx: Ctx) -> Result<RunOutcome> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(&ctx.opts.out_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|f| f != SUMMARY_FILE))
        .collect();
    names.sort();
    let mut files = Vec::new();
    let mut all = Vec::new();
    for p in &names {
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        let mut found = Vec::new();
        collect_reports(&value, &mut found);
        found.retain(|r| ctx.cfg.selects(&r.id));
        files.push(FileSummary {
            file: p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            checks: found.len(),
            failed: found.iter().filter(|r| !r.passed).map(|r| r.id.clone()).collect(),
        });
        all.extend(found);
    }
    if all.is_empty() {
        return Err(Error::InvalidConfig(format!("no check reports found in {}", ctx.opts.out_dir.display())));
    }
    let failed: Vec<CheckReport> = all.iter().filter(|r| !r.passed).cloned().collect();
    ctx.finish("report", SUMMARY_FILE, ReportBody { checks: all.len(), files }, failed)
}
