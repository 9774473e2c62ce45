//! Grid expansion and sweep execution.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use difflab_core::{
    energy_metrics, run_sampler, ConditionalPair, NoiseSchedule, ScheduleKind, TimestepGrid,
};

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::persist::{run_id, write_run, RunArtifacts, RunConfig};

/// Expands the Cartesian grid (scenario x sampler x cfg x seed) in a stable
/// order.
pub fn expand_grid(config: &SweepConfig) -> Vec<RunConfig> {
    let mut runs = Vec::with_capacity(config.grid_size());
    for scenario in &config.scenarios {
        for &sampler in &config.samplers {
            for guidance in &config.cfg {
                for &seed in &config.seeds {
                    runs.push(RunConfig {
                        scenario: scenario.clone(),
                        sampler,
                        guidance: guidance.clone(),
                        seed,
                        steps: config.steps,
                        noise: config.noise,
                        energy: config.energy.clone(),
                        skip_initial: config.skip_initial,
                    });
                }
            }
        }
    }
    runs
}

/// Executes one run end to end (no I/O).
pub fn execute_run(config: &RunConfig) -> Result<RunArtifacts> {
    let schedule = NoiseSchedule::new(
        ScheduleKind::Linear,
        config.noise.t_train,
        config.noise.beta_min,
        config.noise.beta_max,
    )?;
    let grid = TimestepGrid::new(&schedule, config.steps)?;
    let pair = ConditionalPair::from_scenario(&config.scenario)?;
    let record = run_sampler(
        &pair,
        &schedule,
        &grid,
        &config.guidance,
        config.sampler,
        &config.energy,
        config.seed,
    )?;
    let scores = energy_metrics(&record.energy_trajectory(), config.skip_initial)?;
    Ok(RunArtifacts {
        config: config.clone(),
        entries: record.entries,
        final_latent: record.final_latent,
        scores,
    })
}

/// Outcome of a sweep: artifacts of completed runs plus recorded failures.
pub struct SweepOutcome {
    pub completed: Vec<RunArtifacts>,
    pub failures: Vec<(RunConfig, String)>,
}

/// Runs the whole grid, persisting each run directory as it finishes.
/// `workers = 0` keeps the default rayon pool size.
pub fn run_sweep(config: &SweepConfig, output_dir: &Path, workers: usize) -> Result<SweepOutcome> {
    std::fs::create_dir_all(output_dir)
        .map_err(|e| CliError::io(format!("creating {}", output_dir.display()), e))?;
    let runs = expand_grid(config);
    let total = runs.len();
    let done = AtomicUsize::new(0);

    let execute_and_persist =
        |run_config: &RunConfig| -> (RunConfig, std::result::Result<RunArtifacts, String>) {
            let outcome = execute_run(run_config)
                .and_then(|artifacts| write_run(output_dir, &artifacts).map(|_| artifacts));
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            match &outcome {
                Ok(_) => println!(
                    "[{finished}/{total}] ok run_{} (scenario={} sampler={} cfg={} seed={})",
                    run_id(run_config),
                    run_config.scenario.name,
                    run_config.sampler.name(),
                    run_config.guidance.scale_label(),
                    run_config.seed
                ),
                Err(e) => println!(
                "[{finished}/{total}] FAILED run_{} (scenario={} sampler={} cfg={} seed={}): {e}",
                run_id(run_config),
                run_config.scenario.name,
                run_config.sampler.name(),
                run_config.guidance.scale_label(),
                run_config.seed
            ),
            }
            (run_config.clone(), outcome.map_err(|e| e.to_string()))
        };

    let results: Vec<_> = if workers == 1 {
        runs.iter().map(execute_and_persist).collect()
    } else if workers == 0 {
        runs.par_iter().map(execute_and_persist).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Schema(format!("worker pool: {e}")))?;
        pool.install(|| runs.par_iter().map(execute_and_persist).collect())
    };

    let mut completed = Vec::new();
    let mut failures = Vec::new();
    for (run_config, outcome) in results {
        match outcome {
            Ok(artifacts) => completed.push(artifacts),
            Err(message) => failures.push((run_config, message)),
        }
    }
    Ok(SweepOutcome {
        completed,
        failures,
    })
}
