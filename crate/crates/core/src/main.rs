use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minsurf::cli::{run_subcommand, RunOptions};
use minsurf::config::ExperimentConfig;

/// Rotationally symmetric area-minimizing hypersurfaces: solvers, leaves and checks.
#[derive(Parser, Debug)]
#[command(name = "minsurf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suite for `verify`: identities, bounds or paper-suite.
    #[arg(long, global = true, default_value = "identities")]
    suite: String,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for sampled checks; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record runtimes in the outputs (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve one Plateau problem and verify the solution.
    Plateau,
    /// Build leaves over the z grid and emit plot data.
    Foliate,
    /// Run a check suite.
    Verify,
    /// ADM and induced mass tables.
    Mass,
    /// Second variation and the asymptotically constant quadratic form.
    Stability,
    /// Build and verify the default bump chain.
    Perturb,
    /// Aggregate all JSON reports in the output directory.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Plateau => "plateau",
            Command::Foliate => "foliate",
            Command::Verify => "verify",
            Command::Mass => "mass",
            Command::Stability => "stability",
            Command::Perturb => "perturb",
            Command::Report => "report",
        }
    }
}

fn load(cli: &Cli) -> minsurf::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out_dir = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("minsurf-out"));
    let opts = RunOptions { out_dir, suite: cli.suite.clone(), timings: cli.timings };
    match run_subcommand(cli.command.name(), &cfg, &opts) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("{}", a.display());
            }
            println!("{}", if outcome.passed { "PASS" } else { "FAIL" });
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
