//! Scenario configuration: strict TOML with dotted-path overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use abring_core::propagator::GridSolverConfig;
use abring_core::{EigenIndex, FluxSchedule, RingConfig, Window};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Cycle,
    Holonomy,
    WConvergence,
    Propagate,
    PhaseAudit,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Cycle => "cycle",
            Experiment::Holonomy => "holonomy",
            Experiment::WConvergence => "w-convergence",
            Experiment::Propagate => "propagate",
            Experiment::PhaseAudit => "phase-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Both }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { phi_min: 0.0, phi_max: 1.0, points: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    /// Initial eigenstate index for cycle, propagate and phase-audit.
    pub k: EigenIndex,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self { k: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolonomyConfig {
    pub nx: usize,
    pub steps: usize,
    pub eta_seed: u64,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self { nx: 4096, steps: 400, eta_seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WConvergenceConfig {
    pub sizes: Vec<usize>,
    pub block_half_width: u32,
    pub tolerance: f64,
}

impl Default for WConvergenceConfig {
    fn default() -> Self {
        Self { sizes: vec![101, 201, 401, 801], block_half_width: 5, tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateConfig {
    pub record_every: usize,
    /// Indices whose overlaps are recorded; empty means `k` and `k - 1`.
    pub track: Vec<EigenIndex>,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self { record_every: 100, track: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub ring: RingConfig,
    #[serde(default = "default_schedule")]
    pub schedule: FluxSchedule,
    #[serde(default)]
    pub solver: GridSolverConfig,
    #[serde(default = "default_window")]
    pub window: Window,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub holonomy: HolonomyConfig,
    #[serde(default)]
    pub w_convergence: WConvergenceConfig,
    #[serde(default)]
    pub propagate: PropagateConfig,
}

fn default_schedule() -> FluxSchedule {
    FluxSchedule::unit_cycle(0.0, 10.0).expect("default schedule is valid")
}

fn default_window() -> Window {
    Window::symmetric(10)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            ring: RingConfig::default(),
            schedule: default_schedule(),
            solver: GridSolverConfig::default(),
            window: default_window(),
            state: StateConfig::default(),
            output: OutputConfig::default(),
            spectrum: SpectrumConfig::default(),
            holonomy: HolonomyConfig::default(),
            w_convergence: WConvergenceConfig::default(),
            propagate: PropagateConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses `text`, applies `key=value` overrides and validates the result.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let file: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        let mut value = toml::Table::try_from(ScenarioConfig::default()).context("cannot serialize defaults")?;
        merge(&mut value, file);
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let cfg: ScenarioConfig = toml::Value::Table(value).try_into().context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.ring.validate()?;
        self.schedule.validate()?;
        self.solver.validate()?;
        let ordered = self.spectrum.phi_max.partial_cmp(&self.spectrum.phi_min);
        if self.spectrum.points == 0 || matches!(ordered, None | Some(std::cmp::Ordering::Less)) {
            bail!("spectrum needs at least one point and phi_max >= phi_min");
        }
        if self.holonomy.steps == 0 {
            bail!("holonomy.steps must be positive");
        }
        if self.w_convergence.sizes.iter().any(|&n| n == 0 || n % 2 == 0) {
            bail!("w_convergence.sizes must be odd so the windows are centered");
        }
        if self.propagate.record_every == 0 {
            bail!("propagate.record_every must be positive");
        }
        Ok(())
    }

    /// Tracked indices for the propagate experiment.
    pub fn tracked(&self) -> Vec<EigenIndex> {
        if self.propagate.track.is_empty() {
            vec![self.state.k, self.state.k - 1]
        } else {
            self.propagate.track.clone()
        }
    }
}

/// Deep-merges `top` into `base`; tables merge key by key, anything else replaces.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Sets `a.b.c = value` in `table`. The value is read as a TOML literal and
/// falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item.split_once('=').with_context(|| format!("override `{item}` is not key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override `{item}` has an empty key");
    }
    let value = parse_literal(raw.trim());
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut node = table;
    for key in parents {
        let entry = node.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => bail!("override `{item}`: `{key}` is not a section"),
        };
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
