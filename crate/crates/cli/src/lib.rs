//! Scenario runner for the ring anholonomy experiments.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

use anyhow::{bail, Result};

use config::{Experiment, Format, ScenarioConfig};
use report::Report;

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunOptions {
    /// Scenario file (TOML). Defaults apply to everything left out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Dotted-path override such as `schedule.duration=100`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    /// 0 when every assertion held, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.report.passed() {
            0
        } else {
            2
        }
    }
}

pub fn resolve(experiment: Experiment, opts: &RunOptions) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(opts.config.as_deref(), &opts.overrides)?;
    if let Some(declared) = cfg.experiment {
        if declared != experiment {
            bail!("the config is written for `{declared}`, not `{experiment}`");
        }
    }
    if let Some(out) = &opts.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = opts.format {
        cfg.output.format = format;
    }
    Ok(cfg)
}

pub fn execute(experiment: Experiment, opts: &RunOptions) -> Result<Outcome> {
    let cfg = resolve(experiment, opts)?;
    let report = experiments::run(experiment, &cfg)?;
    let written = report.write(&cfg.output.dir, cfg.output.format)?;
    Ok(Outcome { report, written })
}
