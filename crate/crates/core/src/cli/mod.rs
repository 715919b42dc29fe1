//! Command-line front end.
//!
//! Every subcommand shares one flag set. Settings come from an optional
//! `key = value` file (`--config`) and are overridden by explicit flags. Each
//! run writes its CSV files and a `summary.json` into the `--out` directory.
//!
//! Exit codes: 0 on success, 2 on invalid configuration (nothing is
//! written), 1 on runtime failure.

pub mod config;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::exec::Execution;
pub use config::{Axis, ConfigError, Scenario, ScenarioConfig, Settings};
pub use scenarios::{run_scenario, Report};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Caps the worker count of parallel ensembles. Results do not depend on it.
pub const THREADS_ENV: &str = "ZENOLAB_THREADS";

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "zenolab", version, about = "Quantum Zeno effect in a driven two-level system with decay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Exact amplitude evolution from level |1⟩.
    Evolve,
    /// Quantum-jump Monte Carlo ensemble.
    Trajectories,
    /// Radiative-damping variant: a jump resets the system to |1⟩.
    DampedRabi,
    /// Repeated projective measurements (τ defaults to 2/γ).
    Projective,
    /// Continuous-measurement effective Hamiltonian with the null readout.
    Mch,
    /// Headline numbers of all models at τ = 2/γ.
    Compare,
    /// One row of model quantities per point along --axis.
    Sweep,
}

impl From<Command> for Scenario {
    fn from(c: Command) -> Self {
        match c {
            Command::Evolve => Scenario::Evolve,
            Command::Trajectories => Scenario::Trajectories,
            Command::DampedRabi => Scenario::DampedRabi,
            Command::Projective => Scenario::Projective,
            Command::Mch => Scenario::Mch,
            Command::Compare => Scenario::Compare,
            Command::Sweep => Scenario::Sweep,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Rabi coupling Ω.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Amplitude decay rate γ of level |2⟩.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Level splitting ω₂ − ω₁ (continuous-measurement model only).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta_omega: Option<f64>,
    /// Final time T.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub time: Option<f64>,
    /// Interval between projective measurements.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub n_measurements: Option<u64>,
    #[arg(long, global = true)]
    pub n_traj: Option<u64>,
    /// Master seed of Monte Carlo ensembles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Rows of time-series output.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Jump-time histogram bins.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Sweep axis, `name:min:max:count:lin|log` with name in omega, gamma, time, tau.
    #[arg(long, global = true)]
    pub axis: Option<String>,
    /// Key-value configuration file; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Times (T, τ) are given in units of 1/Ω.
    #[arg(long, global = true)]
    pub dimensionless: bool,
    /// Also emit SVG line charts.
    #[arg(long, global = true)]
    pub svg: bool,
}

impl Flags {
    fn settings(&self) -> Result<Settings, ConfigError> {
        Ok(Settings {
            omega: self.omega,
            gamma: self.gamma,
            delta_omega: self.delta_omega,
            time: self.time,
            tau: self.tau,
            n_measurements: self.n_measurements,
            n_traj: self.n_traj,
            seed: self.seed,
            out: self.out.clone(),
            samples: self.samples,
            bins: self.bins,
            axis: self.axis.as_deref().map(str::parse::<Axis>).transpose()?,
            dimensionless: self.dimensionless.then_some(true),
            svg: self.svg.then_some(true),
        })
    }
}

/// Resolves file settings and flag overrides into a validated config.
pub fn resolve_config(cli: &Cli) -> Result<ScenarioConfig, ConfigError> {
    let base = match &cli.flags.config {
        Some(path) => Settings::load(path)?.0,
        None => Settings::default(),
    };
    let merged = base.overridden_by(cli.flags.settings()?);
    ScenarioConfig::resolve(cli.command.into(), merged)
}

fn execution_from_env() -> Execution {
    let workers = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    Execution::with_workers(workers)
}

/// Summary document `{scenario, params, results, version}`.
pub fn summary_json(config: &ScenarioConfig, report: &Report) -> String {
    let doc = json!({
        "scenario": config.scenario.name(),
        "params": config.echo(),
        "results": report.results,
        "version": VERSION,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

fn write_outputs(dir: &Path, config: &ScenarioConfig, report: &Report) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in &report.files {
        std::fs::write(dir.join(name), content)?;
    }
    std::fs::write(dir.join(SUMMARY_FILE), summary_json(config, report))
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let config = match resolve_config(&cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = match run_scenario(&config, execution_from_env()) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = write_outputs(&config.output_path, &config, &report) {
        eprintln!("error: writing {}: {e}", config.output_path.display());
        return 1;
    }
    println!("{}", serde_json::to_string(&report.results).expect("results serialize"));
    0
}
