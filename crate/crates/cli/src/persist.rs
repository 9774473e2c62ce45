//! Run-directory persistence.
//!
//! Each run lives in `output_dir/run_<hash>/`, content-addressed by the
//! run configuration (including the seed), holding `config.json`,
//! `trajectory.csv`, and `metrics.json`. Floats in the CSV carry 17
//! significant digits so write/read round-trips are lossless.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use difflab_core::{
    EnergyControl, EnergyScores, GuidanceSchedule, RunKey, SamplerKind, ScenarioSpec, StepEntry,
};

use crate::config::NoiseParams;
use crate::error::{CliError, Result};

pub const TRAJECTORY_HEADER: &str = "step,timestep,s_effective,energy,clipped,refreshed";

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub sampler: SamplerKind,
    pub guidance: GuidanceSchedule,
    pub seed: u64,
    pub steps: usize,
    pub noise: NoiseParams,
    pub energy: EnergyControl,
    pub skip_initial: bool,
}

impl RunConfig {
    pub fn run_key(&self) -> RunKey {
        RunKey {
            sampler: self.sampler,
            guidance: self.guidance.clone(),
        }
    }
}

/// On-disk payload of one completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub entries: Vec<StepEntry>,
    pub final_latent: Vec<f64>,
    pub scores: EnergyScores,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsFile {
    scores: EnergyScores,
    seed: u64,
    final_latent: Vec<f64>,
}

/// Stable content address of a run: first 16 hex chars of the SHA-256 of
/// the canonical JSON encoding of its config.
pub fn run_id(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("run config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut id = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        id.push_str(&format!("{byte:02x}"));
    }
    id
}

pub fn run_dir(output_dir: &Path, config: &RunConfig) -> PathBuf {
    output_dir.join(format!("run_{}", run_id(config)))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `config.json`, `trajectory.csv`, and `metrics.json`.
pub fn write_run(output_dir: &Path, artifacts: &RunArtifacts) -> Result<PathBuf> {
    let dir = run_dir(output_dir, &artifacts.config);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;

    let config_json =
        serde_json::to_string_pretty(&artifacts.config).expect("config serializes") + "\n";
    std::fs::write(dir.join("config.json"), config_json)
        .map_err(|e| CliError::io("writing config.json", e))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "step",
        "timestep",
        "s_effective",
        "energy",
        "clipped",
        "refreshed",
    ])
    .map_err(|e| CliError::Schema(e.to_string()))?;
    for e in &artifacts.entries {
        w.write_record([
            e.step.to_string(),
            e.timestep.to_string(),
            fmt_f64(e.s_effective),
            fmt_f64(e.energy),
            e.clipped.to_string(),
            e.refreshed.to_string(),
        ])
        .map_err(|e| CliError::Schema(e.to_string()))?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| CliError::Schema(e.to_string()))?;
    std::fs::write(dir.join("trajectory.csv"), csv_bytes)
        .map_err(|e| CliError::io("writing trajectory.csv", e))?;

    let metrics = MetricsFile {
        scores: artifacts.scores,
        seed: artifacts.config.seed,
        final_latent: artifacts.final_latent.clone(),
    };
    let metrics_json = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
    std::fs::write(dir.join("metrics.json"), metrics_json)
        .map_err(|e| CliError::io("writing metrics.json", e))?;

    Ok(dir)
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let raw = record
        .get(idx)
        .ok_or_else(|| CliError::Schema(format!("missing column `{name}`")))?;
    raw.parse()
        .map_err(|_| CliError::Schema(format!("column `{name}` holds unparsable value `{raw}`")))
}

/// Parses a trajectory CSV, enforcing the exact header.
pub fn read_trajectory(path: &Path) -> Result<Vec<StepEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Schema(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != TRAJECTORY_HEADER {
        return Err(CliError::Schema(format!(
            "trajectory header `{header}` != `{TRAJECTORY_HEADER}`"
        )));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Schema(e.to_string()))?;
        entries.push(StepEntry {
            step: parse_field(&record, 0, "step")?,
            timestep: parse_field(&record, 1, "timestep")?,
            s_effective: parse_field(&record, 2, "s_effective")?,
            energy: parse_field(&record, 3, "energy")?,
            clipped: parse_field(&record, 4, "clipped")?,
            refreshed: parse_field(&record, 5, "refreshed")?,
        });
    }
    if entries.is_empty() {
        return Err(CliError::Schema("trajectory has no rows".into()));
    }
    Ok(entries)
}

/// Reads one run directory back into memory.
pub fn read_run(dir: &Path) -> Result<RunArtifacts> {
    let config_text = std::fs::read_to_string(dir.join("config.json"))
        .map_err(|e| CliError::io(format!("reading {}/config.json", dir.display()), e))?;
    let config: RunConfig =
        serde_json::from_str(&config_text).map_err(|e| CliError::Schema(e.to_string()))?;
    let entries = read_trajectory(&dir.join("trajectory.csv"))?;
    let metrics_text = std::fs::read_to_string(dir.join("metrics.json"))
        .map_err(|e| CliError::io(format!("reading {}/metrics.json", dir.display()), e))?;
    let metrics: MetricsFile =
        serde_json::from_str(&metrics_text).map_err(|e| CliError::Schema(e.to_string()))?;
    Ok(RunArtifacts {
        config,
        entries,
        final_latent: metrics.final_latent,
        scores: metrics.scores,
    })
}

/// Loads every `run_*` directory under `output_dir`, sorted by name.
pub fn load_runs(output_dir: &Path) -> Result<Vec<RunArtifacts>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(output_dir)
        .map_err(|e| CliError::io(format!("listing {}", output_dir.display()), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run_"))
        })
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::EmptySelection(format!(
            "no run_* directories under {}",
            output_dir.display()
        )));
    }
    dirs.iter().map(|d| read_run(d)).collect()
}
