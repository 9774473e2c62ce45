use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use difflab_cli::{
    build_report, emit_energy_plot, execute_run, expand_grid, load_runs, parse_config, run_sweep,
    summary_table, write_run, CliError, GroupBy,
};
use difflab_core::energy_metrics;

#[derive(Parser)]
#[command(
    name = "difflab",
    about = "Diffusion sampling laboratory: energy profiling of guided samplers on analytic mixtures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupByArg {
    Sampler,
    Scale,
    Schedule,
}

impl From<GroupByArg> for GroupBy {
    fn from(value: GroupByArg) -> Self {
        match value {
            GroupByArg::Sampler => GroupBy::Sampler,
            GroupByArg::Scale => GroupBy::Scale,
            GroupByArg::Schedule => GroupBy::Schedule,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config that resolves to exactly one run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the config's seed list with a single seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Execute the full scenario x sampler x cfg x seed grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Recompute metrics.json for every stored run from its trajectory.
    Metrics {
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit an SVG of mean energy per step, one curve per group.
    Plot {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "scale")]
        group_by: GroupByArg,
    },
    /// Print the summary table (rows: sampler, columns: scale, cells: mean
    /// stability) and write summary.csv.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run {
            config,
            out,
            seed_override,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(seed) = seed_override {
                cfg.seeds = vec![seed];
            }
            let output_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let runs = expand_grid(&cfg);
            if runs.len() != 1 {
                return Err(CliError::validation(
                    "config",
                    format!(
                        "`run` needs a config resolving to exactly one run, got {} (use `sweep`)",
                        runs.len()
                    ),
                ));
            }
            let artifacts = execute_run(&runs[0])?;
            let dir = write_run(&output_dir, &artifacts)?;
            println!("wrote {}", dir.display());
            println!(
                "scores: s_stab={:.4} s_cons={:.4} s_eff={:.4} s_conv={:.4}",
                artifacts.scores.s_stab,
                artifacts.scores.s_cons,
                artifacts.scores.s_eff,
                artifacts.scores.s_conv
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            out,
            workers,
            seed_override,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(seed) = seed_override {
                cfg.seeds = vec![seed];
            }
            let output_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let outcome = run_sweep(&cfg, &output_dir, workers)?;
            println!(
                "sweep finished: {} ok, {} failed, output in {}",
                outcome.completed.len(),
                outcome.failures.len(),
                output_dir.display()
            );
            if outcome.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for (run, message) in &outcome.failures {
                    eprintln!(
                        "failed: scenario={} sampler={} cfg={} seed={}: {message}",
                        run.scenario.name,
                        run.sampler.name(),
                        run.guidance.scale_label(),
                        run.seed
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Metrics { out } => {
            let runs = load_runs(&out)?;
            let mut rewritten = 0;
            for mut artifacts in runs {
                let trajectory = difflab_core::EnergyTrajectory::new(
                    artifacts.entries.iter().map(|e| e.energy).collect(),
                )?;
                artifacts.scores = energy_metrics(&trajectory, artifacts.config.skip_initial)?;
                write_run(&out, &artifacts)?;
                rewritten += 1;
            }
            println!(
                "recomputed metrics for {rewritten} runs in {}",
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { out, group_by } => {
            let runs = load_runs(&out)?;
            let group_by: GroupBy = group_by.into();
            let path = out.join(format!("energy_by_{}.svg", group_by.name()));
            emit_energy_plot(&runs, group_by, &path)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { out } => {
            let runs = load_runs(&out)?;
            let report = build_report(&runs)?;
            let (text, csv) = summary_table(&report);
            print!("{text}");
            let path = out.join("summary.csv");
            std::fs::write(&path, csv)
                .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
