//! Sweep configuration: TOML parsing, validation, and defaults.
//!
//! Unknown keys are rejected. Only `scenarios` is required; everything else
//! falls back to the defaults documented in the README (50 steps, seeds
//! {0, 1, 2}, all three samplers, the fixed scale grid {3, 5, 7, 10, 12,
//! 15, 18}, the linear 1e-4 -> 0.02 noise schedule over 1000 timesteps,
//! and all energy enhancements off).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use difflab_core::{
    EnergyControl, GuidanceKind, GuidanceSchedule, MixtureComponent, SamplerKind, ScenarioSpec,
};

use crate::error::{CliError, Result};

pub const DEFAULT_STEPS: usize = 50;
pub const DEFAULT_SEEDS: [u64; 3] = [0, 1, 2];
pub const DEFAULT_SCALES: [f64; 7] = [3.0, 5.0, 7.0, 10.0, 12.0, 15.0, 18.0];
pub const DEFAULT_EXP_STEEPNESS: f64 = 3.0;
pub const DEFAULT_SIGMOID_STEEPNESS: f64 = 10.0;

/// Noise-schedule parameters as exposed in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    #[serde(default = "default_t_train")]
    pub t_train: usize,
    #[serde(default = "default_beta_min")]
    pub beta_min: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
}

fn default_t_train() -> usize {
    1000
}
fn default_beta_min() -> f64 {
    1e-4
}
fn default_beta_max() -> f64 {
    0.02
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            t_train: 1000,
            beta_min: 1e-4,
            beta_max: 0.02,
        }
    }
}

/// Fully validated sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenarios: Vec<ScenarioSpec>,
    pub samplers: Vec<SamplerKind>,
    pub cfg: Vec<GuidanceSchedule>,
    pub steps: usize,
    pub seeds: Vec<u64>,
    pub noise: NoiseParams,
    pub energy: EnergyControl,
    pub skip_initial: bool,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    pub fn grid_size(&self) -> usize {
        self.scenarios.len() * self.samplers.len() * self.cfg.len() * self.seeds.len()
    }
}

// ---------------------------------------------------------------------------
// Raw (on-disk) layer.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenarios: Option<Vec<RawScenario>>,
    samplers: Option<Vec<String>>,
    cfg: Option<Vec<RawCfgEntry>>,
    steps: Option<usize>,
    seeds: Option<Vec<u64>>,
    noise: Option<NoiseParams>,
    energy: Option<RawEnergy>,
    skip_initial: Option<bool>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    dimension: usize,
    target: Vec<usize>,
    components: Vec<RawComponent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    weight: f64,
    mean: Vec<f64>,
    variance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCfgEntry {
    Scale(f64),
    Schedule(RawGuidance),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuidance {
    kind: String,
    s0: f64,
    s1: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

/// Energy-control block; serialized keys per the documented interface.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnergy {
    #[serde(default)]
    clipping: bool,
    #[serde(default = "default_e_base")]
    e_base: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    adaptive: bool,
    #[serde(default)]
    refresh: bool,
    #[serde(default = "default_refresh_fraction")]
    refresh_fraction: f64,
    #[serde(default)]
    clip_mode: difflab_core::ClipMode,
}

fn default_e_base() -> f64 {
    1.0
}
fn default_refresh_fraction() -> f64 {
    0.5
}

// ---------------------------------------------------------------------------
// Parsing and validation.

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn parse_sampler(name: &str) -> Result<SamplerKind> {
    SamplerKind::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            CliError::validation(
                "samplers",
                format!(
                    "unknown sampler `{name}` (expected one of ddim, euler_ancestral, dpmpp_2m)"
                ),
            )
        })
}

fn build_guidance(raw: RawGuidance) -> Result<GuidanceSchedule> {
    let kind = match raw.kind.as_str() {
        "fixed" => GuidanceKind::Fixed,
        "linear_decreasing" => GuidanceKind::LinearDecreasing,
        "cosine_ramp" => GuidanceKind::CosineRamp,
        "step" => GuidanceKind::Step,
        "exponential" => GuidanceKind::Exponential,
        "sigmoid" => GuidanceKind::Sigmoid,
        other => {
            return Err(CliError::validation(
                "cfg.kind",
                format!("unknown schedule kind `{other}`"),
            ))
        }
    };
    let s1 = match (kind, raw.s1) {
        (GuidanceKind::Fixed, s1) => s1.unwrap_or(raw.s0),
        (_, Some(s1)) => s1,
        (_, None) => {
            return Err(CliError::validation(
                "cfg.s1",
                format!("schedule kind `{}` requires s1", raw.kind),
            ))
        }
    };
    let alpha = match kind {
        GuidanceKind::Exponential => Some(raw.alpha.unwrap_or_else(|| {
            log::warn!(
                "exponential schedule without `alpha`; defaulting to {DEFAULT_EXP_STEEPNESS}"
            );
            DEFAULT_EXP_STEEPNESS
        })),
        _ => raw.alpha,
    };
    let beta_steep = match kind {
        GuidanceKind::Sigmoid => Some(raw.beta.unwrap_or_else(|| {
            log::warn!(
                "sigmoid schedule without `beta`; defaulting to {DEFAULT_SIGMOID_STEEPNESS}"
            );
            DEFAULT_SIGMOID_STEEPNESS
        })),
        _ => raw.beta,
    };
    if raw.s0 < 0.0 || s1 < 0.0 {
        return Err(CliError::validation("cfg", "scales must be >= 0"));
    }
    Ok(GuidanceSchedule {
        kind,
        s0: raw.s0,
        s1,
        alpha,
        beta_steep,
    })
}

fn validate(raw: RawConfig) -> Result<SweepConfig> {
    let raw_scenarios = raw
        .scenarios
        .ok_or_else(|| CliError::validation("scenarios", "at least one scenario is required"))?;
    if raw_scenarios.is_empty() {
        return Err(CliError::validation("scenarios", "must be non-empty"));
    }
    let scenarios: Vec<ScenarioSpec> = raw_scenarios
        .into_iter()
        .map(|s| {
            let spec = ScenarioSpec {
                name: s.name,
                dimension: s.dimension,
                components: s
                    .components
                    .into_iter()
                    .map(|c| MixtureComponent {
                        weight: c.weight,
                        mean: c.mean,
                        variance: c.variance,
                    })
                    .collect(),
                target: s.target,
            };
            spec.validate()
                .map_err(|e| CliError::validation("scenarios", e.to_string()))?;
            // Surface weight/variance violations now rather than at run time.
            difflab_core::ConditionalPair::from_scenario(&spec)
                .map_err(|e| CliError::validation("scenarios", e.to_string()))?;
            Ok(spec)
        })
        .collect::<Result<_>>()?;

    let samplers = match raw.samplers {
        None => SamplerKind::ALL.to_vec(),
        Some(names) => {
            if names.is_empty() {
                return Err(CliError::validation("samplers", "must be non-empty"));
            }
            names
                .iter()
                .map(|n| parse_sampler(n))
                .collect::<Result<_>>()?
        }
    };

    let cfg: Vec<GuidanceSchedule> = match raw.cfg {
        None => DEFAULT_SCALES
            .iter()
            .map(|&s| GuidanceSchedule::fixed(s))
            .collect(),
        Some(entries) => {
            if entries.is_empty() {
                return Err(CliError::validation("cfg", "must be non-empty"));
            }
            entries
                .into_iter()
                .map(|e| match e {
                    RawCfgEntry::Scale(s) => {
                        if s < 0.0 {
                            Err(CliError::validation("cfg", "scales must be >= 0"))
                        } else {
                            Ok(GuidanceSchedule::fixed(s))
                        }
                    }
                    RawCfgEntry::Schedule(raw) => build_guidance(raw),
                })
                .collect::<Result<_>>()?
        }
    };

    let steps = raw.steps.unwrap_or(DEFAULT_STEPS);
    let noise = raw.noise.unwrap_or_default();
    if noise.t_train == 0 {
        return Err(CliError::validation("noise.t_train", "must be >= 1"));
    }
    if !(noise.beta_min > 0.0 && noise.beta_min <= noise.beta_max && noise.beta_max < 1.0) {
        return Err(CliError::validation(
            "noise",
            "need 0 < beta_min <= beta_max < 1",
        ));
    }
    if steps == 0 || steps > noise.t_train {
        return Err(CliError::validation(
            "steps",
            format!("must lie in [1, t_train = {}]", noise.t_train),
        ));
    }

    let seeds = match raw.seeds {
        None => DEFAULT_SEEDS.to_vec(),
        Some(s) if s.is_empty() => return Err(CliError::validation("seeds", "must be non-empty")),
        Some(s) => s,
    };

    let energy = match raw.energy {
        None => EnergyControl::default(),
        Some(e) => {
            let ctrl = EnergyControl {
                clipping_enabled: e.clipping,
                e_base: e.e_base,
                gamma: e.gamma,
                adaptive_threshold: e.adaptive,
                refresh_enabled: e.refresh,
                refresh_fraction: e.refresh_fraction,
                refresh_blend: 0.5,
                clip_mode: e.clip_mode,
            };
            ctrl.validate()
                .map_err(|e| CliError::validation("energy", e.to_string()))?;
            ctrl
        }
    };

    Ok(SweepConfig {
        scenarios,
        samplers,
        cfg,
        steps,
        seeds,
        noise,
        energy,
        skip_initial: raw.skip_initial.unwrap_or(false),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("runs")),
    })
}
